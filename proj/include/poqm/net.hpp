#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "poqm/protocols.hpp"
#include "poqm/report.hpp"
#include "poqm/wire.hpp"

namespace poqm::net {

using json = nlohmann::ordered_json;

struct NetConfig {
    std::string host = "127.0.0.1";
    int port = 0;               // 0 on the server: pick an ephemeral port
    std::string port_file;      // server writes the bound port here
    std::string protocol = "bb84-it";
    int n = 8;
    int k = 1;
    double fail_prob = 0.0;
    int hold_ms = 0;            // verifier-enforced wall-clock hold
    double depolarize = 0.0;    // prover-side hold noise (honest demo)
    std::uint64_t seed = 1;
    int sessions = 1;
    int timeout_ms = 10000;
    std::string out_path;       // report file; -<index> suffix per session
    std::string format = "json";
};

namespace detail {

struct Socket {
    int fd = -1;

    Socket() = default;
    explicit Socket(int f) : fd(f) {}
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    Socket(Socket&& o) noexcept : fd(o.fd) { o.fd = -1; }
    Socket& operator=(Socket&& o) noexcept {
        if (this != &o) {
            close_fd();
            fd = o.fd;
            o.fd = -1;
        }
        return *this;
    }
    ~Socket() { close_fd(); }

    void close_fd() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }

    void set_recv_timeout(int ms) const {
        timeval tv{ms / 1000, (ms % 1000) * 1000};
        ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    }

    void send_all(std::string_view bytes) const {
        std::size_t off = 0;
        while (off < bytes.size()) {
            ssize_t w = ::send(fd, bytes.data() + off, bytes.size() - off,
                               MSG_NOSIGNAL);
            if (w <= 0) throw ProtocolError("socket send failed");
            off += static_cast<std::size_t>(w);
        }
    }

    void recv_exact(char* buf, std::size_t len) const {
        std::size_t off = 0;
        while (off < len) {
            ssize_t r = ::recv(fd, buf + off, len - off, 0);
            if (r == 0) throw ChannelClosed{};
            if (r < 0) {
                if (errno == EAGAIN || errno == EWOULDBLOCK)
                    throw ProtocolError("recv timeout");
                throw ProtocolError("socket recv failed");
            }
            off += static_cast<std::size_t>(r);
        }
    }

    bool pending(int wait_ms = 0) const {
        pollfd pfd{fd, POLLIN, 0};
        return ::poll(&pfd, 1, wait_ms) > 0 && (pfd.revents & POLLIN);
    }
};

inline Socket listen_on(const std::string& host, int& port) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (s.fd < 0) throw std::runtime_error("socket() failed");
    int one = 1;
    ::setsockopt(s.fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw std::invalid_argument("bad listen address: " + host);
    if (::bind(s.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        throw std::runtime_error("bind failed on " + host + ":" +
                                 std::to_string(port));
    if (::listen(s.fd, 8) != 0) throw std::runtime_error("listen failed");
    socklen_t alen = sizeof addr;
    ::getsockname(s.fd, reinterpret_cast<sockaddr*>(&addr), &alen);
    port = ntohs(addr.sin_port);
    return s;
}

inline Socket connect_to(const std::string& host, int port, int timeout_ms) {
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(timeout_ms);
    for (;;) {
        Socket s(::socket(AF_INET, SOCK_STREAM, 0));
        if (s.fd < 0) throw std::runtime_error("socket() failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
            throw std::invalid_argument("bad host address: " + host);
        if (::connect(s.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) ==
            0)
            return s;
        if (std::chrono::steady_clock::now() > deadline)
            throw ProtocolError("connect timeout to " + host + ":" +
                                std::to_string(port));
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

struct FrameLog {
    std::vector<std::string> lines;  // "tx <hex>" / "rx <hex>"
    std::vector<double> times_ms;    // per frame, since log creation
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();

    void stamp() {
        times_ms.push_back(std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start)
                               .count());
    }
    void tx(std::string_view raw) {
        lines.push_back("tx " + to_hex(raw));
        stamp();
    }
    void rx(std::string_view raw) {
        lines.push_back("rx " + to_hex(raw));
        stamp();
    }

    // The transcript proper: frame bytes only, no timing, so equal-seed runs
    // compare byte-identical.
    std::string joined() const {
        std::string out;
        for (const auto& l : lines) {
            out += l;
            out += "\n";
        }
        return out;
    }

    std::uint8_t type_of(std::size_t index) const {
        // "tx " + 8 hex chars of length, then 2 hex chars of type
        const std::string& l = lines.at(index);
        return static_cast<std::uint8_t>(
            std::stoi(l.substr(3 + 8, 2), nullptr, 16));
    }
};

inline void send_frame(const Socket& sock, FrameLog& log, std::uint8_t type,
                       const json& payload) {
    std::string raw = wire::encode_frame(type, payload);
    log.tx(raw);
    sock.send_all(raw);
}

inline wire::Frame recv_frame(const Socket& sock, FrameLog& log) {
    char header[wire::kHeaderSize];
    sock.recv_exact(header, sizeof header);
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
        len = len << 8 | static_cast<unsigned char>(header[i]);
    if (len > wire::kMaxPayload) throw DecodeError("payload exceeds 1 MiB");
    std::string raw(header, sizeof header);
    raw.resize(wire::kHeaderSize + len);
    if (len > 0) sock.recv_exact(raw.data() + wire::kHeaderSize, len);
    log.rx(raw);
    return wire::decode_frame(raw);
}

enum class Phase { init, exec };

/// Channel running over framed TCP. Classical sends map to INIT_MSG frames
/// in the initialization phase and to CHALLENGE/ANSWER (by sender role) in
/// the execution phase; the quantum handoff ships its description in a
/// QSTATE_ENVELOPE frame, which is exactly why adversarial experiments stay
/// in process (a remote peer reading the envelope could cheat freely).
class FrameChannel : public Channel {
  public:
    FrameChannel(const Socket& sock, FrameLog& log, Role self)
        : sock_(sock), log_(log), self_(self) {}

    void set_phase(Phase p) { phase_ = p; }

    void send(std::string bytes) override {
        json payload;
        payload["data"] = bytes;
        send_frame(sock_, log_, send_type(), payload);
    }

    std::string recv() override {
        wire::Frame f = recv_frame(sock_, log_);
        if (f.type == wire::kError)
            throw ProtocolError("peer error: " +
                                f.payload.value("reason", std::string{}));
        if (f.type != recv_type())
            throw ProtocolError(std::string("expected ") +
                                wire::type_name(recv_type()) + ", got " +
                                wire::type_name(f.type));
        return f.payload.at("data").get<std::string>();
    }

    void send_qstate(const qsim::Bb84Description& desc) override {
        json payload;
        payload["n"] = desc.n;
        payload["x"] = desc.x;
        payload["theta"] = desc.theta;
        send_frame(sock_, log_, wire::kQStateEnvelope, payload);
    }

    qsim::Bb84Description recv_qstate() override {
        wire::Frame f = recv_frame(sock_, log_);
        if (f.type != wire::kQStateEnvelope)
            throw ProtocolError(std::string("expected QSTATE_ENVELOPE, got ") +
                                wire::type_name(f.type));
        return {f.payload.at("n").get<int>(),
                f.payload.at("x").get<std::string>(),
                f.payload.at("theta").get<std::string>()};
    }

  private:
    std::uint8_t send_type() const {
        if (phase_ == Phase::init) return wire::kInitMsg;
        return self_ == Role::verifier ? wire::kChallenge : wire::kAnswer;
    }
    std::uint8_t recv_type() const {
        if (phase_ == Phase::init) return wire::kInitMsg;
        return self_ == Role::verifier ? wire::kAnswer : wire::kChallenge;
    }

    const Socket& sock_;
    FrameLog& log_;
    Role self_;
    Phase phase_ = Phase::init;
};

inline json hello_payload(const NetConfig& cfg) {
    json j;
    j["protocol"] = cfg.protocol;
    j["n"] = cfg.n;
    j["k"] = cfg.k;
    return j;
}

}  // namespace detail

struct SessionResult {
    Verdict verdict;
    double session_ms = 0.0;
    report::Report rep;
};

/**
 * Serves one verifier session on an accepted connection: HELLO exchange,
 * init-phase frames, PHASE_DONE, a verifier-enforced wall-clock hold (any
 * frame arriving during the hold is a protocol violation answered with an
 * ERROR frame), execution frames, VERDICT, and a report with the full frame
 * log and timings.
 */
inline SessionResult serve_session(detail::Socket conn, const NetConfig& cfg,
                                   std::uint64_t session_seed,
                                   int session_index) {
    using clock = std::chrono::steady_clock;
    conn.set_recv_timeout(cfg.timeout_ms);
    detail::FrameLog log;
    SessionResult result;
    result.verdict = {false, "session not completed"};
    auto t0 = clock::now();

    ProtocolParams params{.n = cfg.n, .k = cfg.k, .fail_prob = cfg.fail_prob};
    auto proto = make_protocol(cfg.protocol, params);
    Rng root(session_seed);
    Rng vrng = root.child(0);

    try {
        wire::Frame hello = detail::recv_frame(conn, log);
        if (hello.type != wire::kHello)
            throw ProtocolError("expected HELLO first");
        json mine = detail::hello_payload(cfg);
        if (hello.payload.value("protocol", std::string{}) !=
                cfg.protocol ||
            hello.payload.value("n", -1) != cfg.n ||
            hello.payload.value("k", -1) != cfg.k) {
            json err;
            err["reason"] = "parameter mismatch";
            err["expected"] = mine;
            detail::send_frame(conn, log, wire::kError, err);
            result.verdict = {false, "parameter mismatch"};
        } else {
            detail::send_frame(conn, log, wire::kHello, mine);
            auto verifier = proto->make_verifier();
            detail::FrameChannel chan(conn, log, Role::verifier);
            chan.set_phase(detail::Phase::init);
            std::string v = verifier->init_phase(chan, vrng);

            detail::send_frame(conn, log, wire::kPhaseDone, json::object());
            auto hold_start = clock::now();
            if (cfg.hold_ms > 0)
                std::this_thread::sleep_until(
                    hold_start + std::chrono::milliseconds(cfg.hold_ms));
            if (conn.pending(0)) {
                // Nothing may arrive before CHALLENGE.
                json err;
                err["reason"] = "message before CHALLENGE";
                detail::send_frame(conn, log, wire::kError, err);
                result.verdict = {false,
                                  "protocol violation: message before "
                                  "CHALLENGE"};
            } else {
                chan.set_phase(detail::Phase::exec);
                result.verdict = verifier->exec_phase(v, chan, vrng);
                json verdict_payload;
                verdict_payload["accepted"] = result.verdict.accepted;
                verdict_payload["detail"] = result.verdict.detail;
                detail::send_frame(conn, log, wire::kVerdict, verdict_payload);
            }
        }
    } catch (ProtocolError& e) {
        result.verdict = {false, std::string("protocol violation: ") + e.what()};
        try {
            json err;
            err["reason"] = e.what();
            detail::send_frame(conn, log, wire::kError, err);
        } catch (...) {
        }
    } catch (DecodeError& e) {
        result.verdict = {false, std::string("decode error: ") + e.what()};
        try {
            json err;
            err["reason"] = e.what();
            detail::send_frame(conn, log, wire::kError, err);
        } catch (...) {
        }
    }

    result.session_ms =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    report::Report rep;
    rep.experiment = "net-session";
    rep.seed = session_seed;
    rep.params = detail::hello_payload(cfg);
    rep.params["hold_ms"] = cfg.hold_ms;
    rep.params["session"] = session_index;
    rep.gates.push_back({"verdict-accepted", result.verdict.accepted});
    rep.extra["verdict_detail"] = result.verdict.detail;
    rep.extra["transcript"] = log.joined();
    rep.extra["frame_times_ms"] = log.times_ms;
    {
        std::vector<std::string> types;
        for (std::size_t i = 0; i < log.lines.size(); ++i)
            types.push_back(wire::type_name(log.type_of(i)));
        rep.extra["frame_types"] = types;
    }
    rep.wall_ms = result.session_ms;
    result.rep = std::move(rep);
    return result;
}

/// Listens, serves cfg.sessions sessions (one thread per connection), and
/// returns their reports in session order. Session i runs with seed
/// child(i) of cfg.seed, so equal configurations replay byte-identical
/// frame logs.
inline std::vector<SessionResult> serve_verifier(const NetConfig& cfg) {
    int port = cfg.port;
    detail::Socket listener = detail::listen_on(cfg.host, port);
    if (!cfg.port_file.empty()) {
        std::ofstream pf(cfg.port_file);
        pf << port << "\n";
    }
    std::vector<SessionResult> results(static_cast<std::size_t>(cfg.sessions));
    std::vector<std::thread> workers;
    Rng root(cfg.seed);
    for (int i = 0; i < cfg.sessions; ++i) {
        sockaddr_in peer{};
        socklen_t plen = sizeof peer;
        int cfd = ::accept(listener.fd, reinterpret_cast<sockaddr*>(&peer),
                           &plen);
        if (cfd < 0) throw std::runtime_error("accept failed");
        std::uint64_t session_seed =
            root.child(static_cast<std::uint64_t>(i)).seed();
        workers.emplace_back([&, cfd, i, session_seed] {
            results[static_cast<std::size_t>(i)] = serve_session(
                detail::Socket(cfd), cfg, session_seed, i);
        });
    }
    for (auto& w : workers) w.join();

    if (!cfg.out_path.empty()) {
        for (int i = 0; i < cfg.sessions; ++i) {
            std::string path = cfg.out_path;
            if (cfg.sessions > 1)
                path += "-" + std::to_string(i);
            std::ofstream out(path);
            out << report::emit(results[static_cast<std::size_t>(i)].rep,
                                cfg.format);
        }
    }
    return results;
}

struct ProverOutcome {
    bool accepted = false;
    std::string verdict_detail;
    std::string transcript;  // frame log, hex lines
};

/// Runs the honest prover against a remote verifier. Applies its own hold
/// depolarization after PHASE_DONE (honest-demo behavior; the verifier
/// enforces only the wall clock).
inline ProverOutcome run_prover(const NetConfig& cfg) {
    detail::Socket conn =
        detail::connect_to(cfg.host, cfg.port, cfg.timeout_ms);
    conn.set_recv_timeout(cfg.timeout_ms + cfg.hold_ms + 5000);
    detail::FrameLog log;

    ProtocolParams params{.n = cfg.n, .k = cfg.k, .fail_prob = cfg.fail_prob};
    auto proto = make_protocol(cfg.protocol, params);
    auto prover = proto->make_honest_prover();
    Rng root(cfg.seed);
    Rng prng = root.child(1);
    Rng hold_rng = root.child(2);

    detail::send_frame(conn, log, wire::kHello, detail::hello_payload(cfg));
    wire::Frame ack = detail::recv_frame(conn, log);
    if (ack.type == wire::kError)
        throw ProtocolError("verifier rejected HELLO: " +
                            ack.payload.value("reason", std::string{}));
    if (ack.type != wire::kHello) throw ProtocolError("expected HELLO ack");

    detail::FrameChannel chan(conn, log, Role::prover);
    chan.set_phase(detail::Phase::init);
    ProverInit pi = prover->init_phase(chan, prng);

    wire::Frame done = detail::recv_frame(conn, log);
    if (done.type != wire::kPhaseDone)
        throw ProtocolError("expected PHASE_DONE");
    if (cfg.depolarize > 0.0)
        for (int q = 0; q < pi.memory.n; ++q)
            pi.memory = qsim::depolarize(pi.memory, q, cfg.depolarize,
                                         hold_rng);

    chan.set_phase(detail::Phase::exec);
    prover->exec_phase(pi.state, pi.memory, chan, prng);

    wire::Frame verdict = detail::recv_frame(conn, log);
    if (verdict.type != wire::kVerdict)
        throw ProtocolError("expected VERDICT");
    ProverOutcome out;
    out.accepted = verdict.payload.at("accepted").get<bool>();
    out.verdict_detail = verdict.payload.value("detail", std::string{});
    out.transcript = log.joined();
    return out;
}

}  // namespace poqm::net
