#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "poqm/qsim.hpp"
#include "poqm/rng.hpp"
#include "poqm/util.hpp"

namespace poqm {

enum class Role { verifier, prover };

inline const char* role_name(Role r) {
    return r == Role::verifier ? "verifier" : "prover";
}

enum class MsgKind { classical, qenvelope };

struct TranscriptEntry {
    Role sender;
    MsgKind kind;
    std::string bytes;

    bool operator==(const TranscriptEntry&) const = default;
};

/// Ordered record of one phase's messages. Append-only; classical senders
/// must alternate within a phase (checked by the runner; violations fold
/// into a rejecting verdict).
struct Transcript {
    std::vector<TranscriptEntry> entries;

    int classical_count() const {
        int c = 0;
        for (const auto& e : entries)
            if (e.kind == MsgKind::classical) ++c;
        return c;
    }

    bool alternating() const {
        const TranscriptEntry* prev = nullptr;
        for (const auto& e : entries) {
            if (e.kind != MsgKind::classical) continue;
            if (prev && prev->sender == e.sender) return false;
            prev = &e;
        }
        return true;
    }

    /// Length-prefixed byte serialization; stable across runs.
    std::string serialize() const {
        std::string out;
        for (const auto& e : entries) {
            out.push_back(e.sender == Role::verifier ? 'V' : 'P');
            out.push_back(e.kind == MsgKind::classical ? 'C' : 'Q');
            std::uint32_t len = static_cast<std::uint32_t>(e.bytes.size());
            for (int s = 24; s >= 0; s -= 8)
                out.push_back(static_cast<char>((len >> s) & 0xff));
            out += e.bytes;
        }
        return out;
    }

    static Transcript concat(const Transcript& a, const Transcript& b) {
        Transcript t = a;
        t.entries.insert(t.entries.end(), b.entries.begin(), b.entries.end());
        return t;
    }

    bool operator==(const Transcript&) const = default;
};

struct Verdict {
    bool accepted = false;
    std::string detail;
};

struct HoldSpec {
    int hold_ms = 0;
    double depolarize = 0.0;
};

struct ProtocolParams {
    int n = 8;
    int k = 1;                       // challenge length, where applicable
    double fail_prob = 0.0;          // ideal-RSP fail knob
    std::optional<HoldSpec> hold;
    int recv_timeout_ms = 30000;
};

struct ChannelClosed : ProtocolError {
    ChannelClosed() : ProtocolError("channel closed") {}
};

/// One party's view of the classical channel. send_qstate models the
/// out-of-band quantum handoff: in process only a content-free marker enters
/// the transcript; the networked transport instead ships the description in
/// a QSTATE_ENVELOPE frame (a simulation-only fiction, see the netcli docs).
class Channel {
  public:
    virtual ~Channel() = default;
    virtual void send(std::string bytes) = 0;
    virtual std::string recv() = 0;
    virtual void send_qstate(const qsim::Bb84Description& desc) = 0;
    virtual qsim::Bb84Description recv_qstate() = 0;
};

/// In-process duplex channel: two endpoints over shared queues, recording
/// every message into one log in send order.
class LocalDuplex {
  public:
    explicit LocalDuplex(int recv_timeout_ms = 30000)
        : timeout_(recv_timeout_ms) {}

    class Endpoint : public Channel {
      public:
        Endpoint(LocalDuplex& d, Role self) : d_(d), self_(self) {}

        void send(std::string bytes) override {
            std::lock_guard lk(d_.m_);
            d_.log_.entries.push_back({self_, MsgKind::classical, bytes});
            inbox(other()).push_back(std::move(bytes));
            d_.cv_.notify_all();
        }

        std::string recv() override {
            std::unique_lock lk(d_.m_);
            auto deadline = std::chrono::steady_clock::now() +
                            std::chrono::milliseconds(d_.timeout_);
            auto& q = inbox(self_);
            while (q.empty()) {
                if (d_.closed_[static_cast<int>(other())]) throw ChannelClosed{};
                if (d_.cv_.wait_until(lk, deadline) == std::cv_status::timeout)
                    throw ProtocolError("recv timeout");
            }
            std::string out = std::move(q.front());
            q.pop_front();
            return out;
        }

        void send_qstate(const qsim::Bb84Description& desc) override {
            std::lock_guard lk(d_.m_);
            d_.log_.entries.push_back(
                {self_, MsgKind::qenvelope, "bb84-envelope"});
            qinbox(other()).push_back(desc);
            d_.cv_.notify_all();
        }

        qsim::Bb84Description recv_qstate() override {
            std::unique_lock lk(d_.m_);
            auto deadline = std::chrono::steady_clock::now() +
                            std::chrono::milliseconds(d_.timeout_);
            auto& q = qinbox(self_);
            while (q.empty()) {
                if (d_.closed_[static_cast<int>(other())]) throw ChannelClosed{};
                if (d_.cv_.wait_until(lk, deadline) == std::cv_status::timeout)
                    throw ProtocolError("recv timeout");
            }
            qsim::Bb84Description out = std::move(q.front());
            q.pop_front();
            return out;
        }

      private:
        Role other() const {
            return self_ == Role::verifier ? Role::prover : Role::verifier;
        }
        std::deque<std::string>& inbox(Role r) {
            return d_.msgs_[static_cast<int>(r)];
        }
        std::deque<qsim::Bb84Description>& qinbox(Role r) {
            return d_.qstates_[static_cast<int>(r)];
        }

        LocalDuplex& d_;
        Role self_;
    };

    Endpoint endpoint(Role r) { return Endpoint(*this, r); }

    void close(Role r) {
        std::lock_guard lk(m_);
        closed_[static_cast<int>(r)] = true;
        cv_.notify_all();
    }

    bool has_unread() {
        std::lock_guard lk(m_);
        return !msgs_[0].empty() || !msgs_[1].empty() ||
               !qstates_[0].empty() || !qstates_[1].empty();
    }

    std::size_t log_size() {
        std::lock_guard lk(m_);
        return log_.entries.size();
    }

    Transcript take_log() {
        std::lock_guard lk(m_);
        Transcript t = std::move(log_);
        log_ = {};
        return t;
    }

  private:
    friend class Endpoint;
    std::mutex m_;
    std::condition_variable cv_;
    std::deque<std::string> msgs_[2];                 // indexed by receiver
    std::deque<qsim::Bb84Description> qstates_[2];
    bool closed_[2] = {false, false};
    Transcript log_;
    int timeout_;
};

struct ProverInit {
    std::string state;
    qsim::QReg memory;
};

/// Joint record of an initialization phase: v on the verifier side,
/// (state, sigma_state) on the prover side, plus the phase transcript.
struct InitOutcome {
    std::string verifier_out;
    std::string prover_state;
    qsim::QReg prover_quantum;
    Transcript transcript;
};

class VerifierPart {
  public:
    virtual ~VerifierPart() = default;
    virtual std::string init_phase(Channel& ch, Rng& rng) = 0;
    virtual Verdict exec_phase(const std::string& v, Channel& ch, Rng& rng) = 0;
};

class ProverPart {
  public:
    virtual ~ProverPart() = default;
    /// Qubits this prover carries across the phase boundary (m1 for the
    /// honest prover, the declared m2 for an adversary). Enforced by the
    /// runner; a mismatch is a hard HarnessError, never a prover loss.
    virtual int carried_qubits() const = 0;
    virtual bool is_adversary() const { return false; }
    virtual ProverInit init_phase(Channel& ch, Rng& rng) = 0;
    virtual void exec_phase(const std::string& state, qsim::QReg& memory,
                            Channel& ch, Rng& rng) = 0;
};

class PoqmProtocol {
  public:
    virtual ~PoqmProtocol() = default;
    virtual std::string name() const = 0;
    virtual const ProtocolParams& params() const = 0;
    virtual int m1() const = 0;
    virtual std::unique_ptr<VerifierPart> make_verifier() const = 0;
    virtual std::unique_ptr<ProverPart> make_honest_prover() const = 0;
};

struct RunResult {
    Verdict verdict;
    Transcript init_transcript;
    Transcript exec_transcript;
    std::string verifier_out;
};

namespace detail {

struct AbortRun {};

struct Rendezvous {
    std::mutex m;
    std::condition_variable cv;
    bool verifier_ready = false;
    bool prover_ready = false;
    bool verifier_dead = false;
    bool prover_dead = false;
    bool resume = false;
    bool abort = false;
    std::string verifier_out;
    ProverInit prover_init;
};

// Rethrows non-protocol exceptions; protocol errors fold into a rejecting
// verdict. Verifiers output only accept/reject, so malformed interaction
// maps to reject with a diagnostic.
inline void fold_party_error(std::exception_ptr e, Verdict& verdict) {
    if (!e) return;
    try {
        std::rethrow_exception(e);
    } catch (ProtocolError& pe) {
        verdict = {false, std::string("protocol violation: ") + pe.what()};
    }
}

}  // namespace detail

/**
 * Executes a full two-phase PoQM session in process. Each party runs on its
 * own thread with its own rng stream derived from `seed`; the harness
 * mediates the phase boundary: it checks the prover's carried-qubit budget
 * and applies the optional hold depolarization to the retained register
 * (the hold duration is only enforced in networked mode). Identical seeds
 * give bit-identical transcripts and verdicts.
 */
inline RunResult run_poqm(const PoqmProtocol& proto, ProverPart& prover,
                          std::uint64_t seed) {
    const ProtocolParams& params = proto.params();
    LocalDuplex duplex(params.recv_timeout_ms);
    auto vchan = duplex.endpoint(Role::verifier);
    auto pchan = duplex.endpoint(Role::prover);
    Rng seed_root(seed);
    Rng vrng = seed_root.child(0);
    Rng prng = seed_root.child(1);
    Rng hold_rng = seed_root.child(2);

    auto verifier = proto.make_verifier();
    detail::Rendezvous sync;
    std::exception_ptr verr, perr;
    Verdict verdict{false, "no verdict"};

    std::thread vthread([&] {
        try {
            std::string v = verifier->init_phase(vchan, vrng);
            std::unique_lock lk(sync.m);
            sync.verifier_out = std::move(v);
            sync.verifier_ready = true;
            sync.cv.notify_all();
            sync.cv.wait(lk, [&] { return sync.resume; });
            if (sync.abort) throw detail::AbortRun{};
            std::string vcopy = sync.verifier_out;
            lk.unlock();
            verdict = verifier->exec_phase(vcopy, vchan, vrng);
        } catch (detail::AbortRun&) {
        } catch (...) {
            verr = std::current_exception();
        }
        duplex.close(Role::verifier);
        std::lock_guard lk(sync.m);
        sync.verifier_dead = true;
        sync.verifier_ready = true;
        sync.cv.notify_all();
    });

    std::thread pthread([&] {
        try {
            ProverInit pi = prover.init_phase(pchan, prng);
            std::unique_lock lk(sync.m);
            sync.prover_init = std::move(pi);
            sync.prover_ready = true;
            sync.cv.notify_all();
            sync.cv.wait(lk, [&] { return sync.resume; });
            if (sync.abort) throw detail::AbortRun{};
            std::string state = sync.prover_init.state;
            qsim::QReg memory = std::move(sync.prover_init.memory);
            lk.unlock();
            prover.exec_phase(state, memory, pchan, prng);
        } catch (detail::AbortRun&) {
        } catch (...) {
            perr = std::current_exception();
        }
        duplex.close(Role::prover);
        std::lock_guard lk(sync.m);
        sync.prover_dead = true;
        sync.prover_ready = true;
        sync.cv.notify_all();
    });

    bool budget_violation = false;
    int budget_have = 0;
    std::size_t boundary_index = 0;
    {
        std::unique_lock lk(sync.m);
        sync.cv.wait(lk,
                     [&] { return sync.verifier_ready && sync.prover_ready; });
        if (sync.verifier_dead || sync.prover_dead) {
            sync.abort = true;
        } else {
            budget_have = sync.prover_init.memory.n;
            if (budget_have != prover.carried_qubits()) {
                budget_violation = true;
                sync.abort = true;
            } else if (params.hold && params.hold->depolarize > 0.0) {
                qsim::QReg& mem = sync.prover_init.memory;
                for (int q = 0; q < mem.n; ++q)
                    mem = qsim::depolarize(mem, q, params.hold->depolarize,
                                           hold_rng);
            }
        }
        boundary_index = duplex.log_size();
        sync.resume = true;
        sync.cv.notify_all();
    }
    vthread.join();
    pthread.join();

    if (budget_violation)
        throw HarnessError("prover carried " + std::to_string(budget_have) +
                           " qubits across the phase boundary, declared " +
                           std::to_string(prover.carried_qubits()));

    detail::fold_party_error(perr, verdict);
    detail::fold_party_error(verr, verdict);

    Transcript full_log = duplex.take_log();
    if (duplex.has_unread())
        verdict = {false, "protocol violation: unconsumed message"};
    if (!full_log.alternating())
        verdict = {false, "protocol violation: sender did not alternate"};

    RunResult rr;
    rr.verdict = verdict;
    rr.init_transcript.entries.assign(
        full_log.entries.begin(),
        full_log.entries.begin() + static_cast<long>(boundary_index));
    rr.exec_transcript.entries.assign(
        full_log.entries.begin() + static_cast<long>(boundary_index),
        full_log.entries.end());
    rr.verifier_out = sync.verifier_out;
    return rr;
}

/// Runs only the initialization phase and returns both parties' outputs.
/// Used by the lowerbound constructions (state puzzles, key exchange).
inline InitOutcome run_init_phase(const PoqmProtocol& proto, ProverPart& prover,
                                  std::uint64_t seed) {
    const ProtocolParams& params = proto.params();
    LocalDuplex duplex(params.recv_timeout_ms);
    auto vchan = duplex.endpoint(Role::verifier);
    auto pchan = duplex.endpoint(Role::prover);
    Rng seed_root(seed);
    Rng vrng = seed_root.child(0);
    Rng prng = seed_root.child(1);

    auto verifier = proto.make_verifier();
    std::exception_ptr verr, perr;
    std::string verifier_out;
    ProverInit pinit;

    std::thread vthread([&] {
        try {
            verifier_out = verifier->init_phase(vchan, vrng);
        } catch (...) {
            verr = std::current_exception();
        }
        duplex.close(Role::verifier);
    });
    std::thread pthread([&] {
        try {
            pinit = prover.init_phase(pchan, prng);
        } catch (...) {
            perr = std::current_exception();
        }
        duplex.close(Role::prover);
    });
    vthread.join();
    pthread.join();
    if (verr) std::rethrow_exception(verr);
    if (perr) std::rethrow_exception(perr);

    if (pinit.memory.n != prover.carried_qubits())
        throw HarnessError("prover carried " +
                           std::to_string(pinit.memory.n) +
                           " qubits, declared " +
                           std::to_string(prover.carried_qubits()));

    InitOutcome out;
    out.verifier_out = std::move(verifier_out);
    out.prover_state = std::move(pinit.state);
    out.prover_quantum = std::move(pinit.memory);
    out.transcript = duplex.take_log();
    return out;
}

struct PoqRunResult {
    Verdict verdict;
    Transcript transcript;  // concatenation of both phase transcripts
};

/**
 * The PoQM -> PoQ wrapper: one interactive protocol whose verifier runs V1
 * then V2 back to back and outputs V2's verdict. Sequential composition, so
 * acceptance and transcripts match run_poqm bit for bit on the same seed.
 */
class Poq {
  public:
    explicit Poq(const PoqmProtocol& base) : base_(&base) {}

    PoqRunResult run(ProverPart& prover, std::uint64_t seed) const {
        RunResult rr = run_poqm(*base_, prover, seed);
        return {rr.verdict,
                Transcript::concat(rr.init_transcript, rr.exec_transcript)};
    }

    const PoqmProtocol& base() const { return *base_; }

  private:
    const PoqmProtocol* base_;
};

inline Poq poqm_to_poq(const PoqmProtocol& proto) { return Poq(proto); }

}  // namespace poqm
