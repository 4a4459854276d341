#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include "poqm/net.hpp"

using namespace poqm;
using namespace poqm::net;

namespace {

int wait_for_port(const std::string& path) {
    for (int i = 0; i < 500; ++i) {
        std::ifstream f(path);
        int port = 0;
        if (f >> port && port > 0) return port;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    throw std::runtime_error("verifier never published its port");
}

std::string temp_name(const std::string& tag) {
    return (std::filesystem::temp_directory_path() /
            ("poqm-test-" + tag + "-" + std::to_string(::getpid())))
        .string();
}

}  // namespace

TEST_CASE("loopback session: honest prover accepted after the hold") {
    NetConfig vcfg;
    vcfg.protocol = "bb84-it";
    vcfg.n = 8;
    vcfg.hold_ms = 150;
    vcfg.seed = 11;
    vcfg.port_file = temp_name("port-a");
    auto server = std::async(std::launch::async,
                             [&] { return serve_verifier(vcfg); });

    NetConfig pcfg = vcfg;
    pcfg.port = wait_for_port(vcfg.port_file);
    pcfg.seed = 12;
    ProverOutcome prover = run_prover(pcfg);
    auto sessions = server.get();

    REQUIRE(prover.accepted);
    REQUIRE(sessions.size() == 1);
    REQUIRE(sessions[0].verdict.accepted);
    REQUIRE(sessions[0].session_ms >= 150.0);

    // Hold enforcement: CHALLENGE never leaves before the hold elapses,
    // checked on the timestamped frame log.
    auto types = sessions[0].rep.extra.at("frame_types")
                     .get<std::vector<std::string>>();
    auto times = sessions[0].rep.extra.at("frame_times_ms")
                     .get<std::vector<double>>();
    auto lines_txt = sessions[0].rep.extra.at("transcript").get<std::string>();
    double t_done = -1, t_challenge = -1;
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (types[i] == "PHASE_DONE") t_done = times[i];
        if (types[i] == "CHALLENGE" && t_challenge < 0) t_challenge = times[i];
    }
    REQUIRE(t_done >= 0.0);
    REQUIRE(t_challenge >= 0.0);
    REQUIRE(t_challenge - t_done >= 150.0 - 1.0);
    REQUIRE_FALSE(lines_txt.empty());
    std::filesystem::remove(vcfg.port_file);
}

TEST_CASE("silent prover times out into a rejecting verdict") {
    NetConfig vcfg;
    vcfg.protocol = "bb84-it";
    vcfg.n = 4;
    vcfg.seed = 71;
    vcfg.timeout_ms = 300;
    vcfg.port_file = temp_name("port-f");
    auto server = std::async(std::launch::async,
                             [&] { return serve_verifier(vcfg); });
    int port = wait_for_port(vcfg.port_file);

    // Connect and say nothing at all.
    net::detail::Socket conn = net::detail::connect_to("127.0.0.1", port, 2000);
    auto sessions = server.get();
    REQUIRE_FALSE(sessions[0].verdict.accepted);
    REQUIRE(sessions[0].verdict.detail.find("timeout") != std::string::npos);
    std::filesystem::remove(vcfg.port_file);
}

TEST_CASE("same seeds replay byte-identical transcripts") {
    auto one_run = [](std::uint64_t vseed, std::uint64_t pseed,
                      const std::string& tag) {
        NetConfig vcfg;
        vcfg.protocol = "puzzle";
        vcfg.n = 6;
        vcfg.k = 2;
        vcfg.seed = vseed;
        vcfg.port_file = temp_name(tag);
        auto server = std::async(std::launch::async,
                                 [&] { return serve_verifier(vcfg); });
        NetConfig pcfg = vcfg;
        pcfg.port = wait_for_port(vcfg.port_file);
        pcfg.seed = pseed;
        ProverOutcome prover = run_prover(pcfg);
        auto sessions = server.get();
        std::filesystem::remove(vcfg.port_file);
        return std::pair{sessions[0].rep.extra["transcript"]
                             .get<std::string>(),
                         prover.transcript};
    };

    auto [v1, p1] = one_run(21, 22, "port-b1");
    auto [v2, p2] = one_run(21, 22, "port-b2");
    REQUIRE(v1 == v2);
    REQUIRE(p1 == p2);
    auto [v3, p3] = one_run(23, 22, "port-b3");
    REQUIRE(v1 != v3);
}

TEST_CASE("answering before CHALLENGE draws an ERROR frame") {
    NetConfig vcfg;
    vcfg.protocol = "bb84-it";
    vcfg.n = 4;
    vcfg.hold_ms = 100;
    vcfg.seed = 31;
    vcfg.port_file = temp_name("port-c");
    auto server = std::async(std::launch::async,
                             [&] { return serve_verifier(vcfg); });
    int port = wait_for_port(vcfg.port_file);

    net::detail::Socket conn = net::detail::connect_to("127.0.0.1", port, 2000);
    conn.set_recv_timeout(3000);
    net::detail::FrameLog log;
    wire::json hello;
    hello["protocol"] = "bb84-it";
    hello["n"] = 4;
    hello["k"] = 1;
    net::detail::send_frame(conn, log, wire::kHello, hello);
    // Fire an ANSWER right away, before any CHALLENGE exists.
    wire::json answer;
    answer["data"] = "0000";
    net::detail::send_frame(conn, log, wire::kAnswer, answer);

    // Drain until the ERROR shows up.
    bool saw_error = false;
    try {
        for (int i = 0; i < 8 && !saw_error; ++i) {
            wire::Frame f = net::detail::recv_frame(conn, log);
            if (f.type == wire::kError) {
                saw_error = true;
                REQUIRE(f.payload.at("reason").get<std::string>().find(
                            "CHALLENGE") != std::string::npos);
            }
        }
    } catch (...) {
    }
    auto sessions = server.get();
    REQUIRE(saw_error);
    REQUIRE_FALSE(sessions[0].verdict.accepted);
    std::filesystem::remove(vcfg.port_file);
}

TEST_CASE("HELLO parameter mismatch is rejected") {
    NetConfig vcfg;
    vcfg.protocol = "bb84-it";
    vcfg.n = 8;
    vcfg.seed = 41;
    vcfg.port_file = temp_name("port-d");
    auto server = std::async(std::launch::async,
                             [&] { return serve_verifier(vcfg); });
    NetConfig pcfg = vcfg;
    pcfg.port = wait_for_port(vcfg.port_file);
    pcfg.n = 12;  // disagrees with the verifier
    REQUIRE_THROWS_AS(run_prover(pcfg), ProtocolError);
    auto sessions = server.get();
    REQUIRE_FALSE(sessions[0].verdict.accepted);
    REQUIRE(sessions[0].verdict.detail.find("mismatch") != std::string::npos);
    std::filesystem::remove(vcfg.port_file);
}

TEST_CASE("two concurrent sessions stay independent") {
    NetConfig vcfg;
    vcfg.protocol = "bb84-it";
    vcfg.n = 6;
    vcfg.sessions = 2;
    vcfg.seed = 51;
    vcfg.port_file = temp_name("port-e");
    auto server = std::async(std::launch::async,
                             [&] { return serve_verifier(vcfg); });
    int port = wait_for_port(vcfg.port_file);

    auto run_one = [&](std::uint64_t seed) {
        NetConfig pcfg = vcfg;
        pcfg.port = port;
        pcfg.seed = seed;
        pcfg.sessions = 1;
        return run_prover(pcfg);
    };
    auto f1 = std::async(std::launch::async, run_one, 61);
    auto f2 = std::async(std::launch::async, run_one, 62);
    ProverOutcome p1 = f1.get();
    ProverOutcome p2 = f2.get();
    auto sessions = server.get();

    REQUIRE(p1.accepted);
    REQUIRE(p2.accepted);
    REQUIRE(sessions.size() == 2);
    REQUIRE(sessions[0].verdict.accepted);
    REQUIRE(sessions[1].verdict.accepted);
    std::filesystem::remove(vcfg.port_file);
}
