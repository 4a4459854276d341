#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "poqm/bb84.hpp"
#include "poqm/stats.hpp"

using namespace poqm;
using Catch::Approx;

TEST_CASE("n_for_m2 arithmetic") {
    REQUIRE(bb84::n_for_m2(1) == 10);
    REQUIRE(bb84::n_for_m2(2) == 19);
    REQUIRE(bb84::n_for_m2(10) == 91);
    REQUIRE_THROWS_AS(bb84::n_for_m2(0), std::invalid_argument);
}

TEST_CASE("it_init delivers the described state") {
    Rng rng(1);
    InitOutcome out = bb84::it_init(6, rng);
    bb84::VerifierSecret vs = bb84::VerifierSecret::parse(out.verifier_out);
    REQUIRE(vs.pass);
    REQUIRE(out.prover_quantum.n == 6);  // m1 = n
    REQUIRE(qsim::fidelity(out.prover_quantum, vs.desc) == Approx(1.0));
    REQUIRE(out.transcript.entries.size() == 1);
    REQUIRE(out.transcript.entries[0].kind == MsgKind::qenvelope);
}

TEST_CASE("it_init theta marginals are uniform") {
    const int n = 6;
    const int seeds = 10000;
    std::vector<int> ones(n, 0);
    for (int s = 0; s < seeds; ++s) {
        Rng rng(static_cast<std::uint64_t>(s));
        InitOutcome out = bb84::it_init(n, rng);
        auto vs = bb84::VerifierSecret::parse(out.verifier_out);
        for (int i = 0; i < n; ++i)
            if (vs.desc.theta[static_cast<std::size_t>(i)] == '1') ++ones[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n; ++i)
        REQUIRE(std::abs(double(ones[static_cast<std::size_t>(i)]) / seeds - 0.5) < 0.02);
}

TEST_CASE("ideal_rsp_init pass/fail behavior") {
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        auto [vs, out] = bb84::ideal_rsp_init(4, 0.0, rng);
        REQUIRE(vs.pass);
        REQUIRE(qsim::fidelity(out.prover_quantum, vs.desc) == Approx(1.0));
    }

    // fail_prob = 1 forces reject in the execution step, and the verifier
    // side never learns the description.
    auto [vs1, out1] = bb84::ideal_rsp_init(4, 1.0, rng);
    REQUIRE_FALSE(vs1.pass);
    REQUIRE(vs1.desc.x.empty());
    REQUIRE_FALSE(bb84::execute_verifier(vs1, "0000").accepted);
    bb84::RspOutcome rsp = bb84::run_ideal_rsp(4, 1.0, rng);
    REQUIRE_FALSE(rsp.pass);
    REQUIRE_FALSE(rsp.desc.has_value());
    REQUIRE(qsim::fidelity(rsp.delivered(), rsp.delivered_desc) ==
            Approx(1.0));
    bb84::RspOutcome rsp_ok = bb84::run_ideal_rsp(4, 0.0, rng);
    REQUIRE(rsp_ok.desc.has_value());
    REQUIRE(rsp_ok.desc->x == rsp_ok.delivered_desc.x);
    std::string fail_v = vs1.to_string();
    auto parsed = bb84::VerifierSecret::parse(fail_v);
    REQUIRE_FALSE(parsed.pass);
    REQUIRE(parsed.desc.x.empty());

    long passes = 0;
    const long trials = 10000;
    for (long i = 0; i < trials; ++i) {
        Rng r(static_cast<std::uint64_t>(1000 + i));
        auto [vs, out] = bb84::ideal_rsp_init(4, 0.25, r);
        if (vs.pass) ++passes;
    }
    REQUIRE(std::abs(double(passes) / trials - 0.75) < 0.015);

    REQUIRE_THROWS_AS(bb84::ideal_rsp_init(4, -0.1, rng),
                      std::invalid_argument);
}

TEST_CASE("execute_prover in matching bases is deterministic") {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        qsim::Bb84Description d = qsim::random_bb84(8, rng);
        std::string x_prime =
            bb84::execute_prover(qsim::prepare_bb84(d), d.theta, rng);
        REQUIRE(x_prime == d.x);
    }
}

TEST_CASE("execute_prover on |0...0> in Hadamard bases is uniform") {
    Rng rng(4);
    const int n = 8;
    const long trials = 5000;
    long weight = 0;
    for (long i = 0; i < trials; ++i) {
        std::string x_prime = bb84::execute_prover(
            qsim::new_register(n), std::string(n, '1'), rng);
        for (char c : x_prime) weight += c == '1';
    }
    double mean = double(weight) / trials;
    REQUIRE(std::abs(mean - n / 2.0) < 3 * std::sqrt(n / 4.0 / trials) + 0.05);
}

TEST_CASE("execute_prover edge and error cases") {
    Rng rng(5);
    REQUIRE(bb84::execute_prover(qsim::QReg::scalar(), "", rng).empty());
    REQUIRE_THROWS_AS(
        bb84::execute_prover(qsim::new_register(2), "0", rng),
        std::invalid_argument);
}

TEST_CASE("execute_verifier") {
    bb84::VerifierSecret vs{true, {4, "1011", "0101"}};
    REQUIRE(bb84::execute_verifier(vs, "1011").accepted);
    REQUIRE_FALSE(bb84::execute_verifier(vs, "1010").accepted);
    REQUIRE_FALSE(bb84::execute_verifier(vs, "10").accepted);
    bb84::VerifierSecret fail{false, {4, "1011", "0101"}};
    REQUIRE_FALSE(bb84::execute_verifier(fail, "1011").accepted);
}

TEST_CASE("extract predicts the honest prover message") {
    bb84::VerifierSecret vs{true, {5, "10110", "00000"}};
    Transcript tau;
    REQUIRE(bb84::extract(vs, tau, "00000") == "10110");

    bb84::VerifierSecret fail{false, {5, "10110", "00000"}};
    REQUIRE_THROWS(bb84::extract(fail, tau, "00000"));

    // Extraction probability 1 against live honest runs.
    bb84::IdealRspProtocol proto({.n = 8});
    long agree = 0;
    const long runs = 3000;
    for (long i = 0; i < runs; ++i) {
        auto prover = proto.make_honest_prover();
        RunResult rr = run_poqm(proto, *prover, static_cast<std::uint64_t>(i));
        REQUIRE(rr.verdict.accepted);
        auto vsec = bb84::VerifierSecret::parse(rr.verifier_out);
        const auto& theta_msg = rr.exec_transcript.entries.at(0).bytes;
        const auto& x_msg = rr.exec_transcript.entries.at(1).bytes;
        if (bb84::extract(vsec, rr.init_transcript, theta_msg) == x_msg)
            ++agree;
    }
    REQUIRE(agree == runs);  // gamma-hat = 1.0
}

TEST_CASE("hold noise lowers the extraction agreement as computed") {
    ProtocolParams params{.n = 8};
    params.hold = HoldSpec{0, 0.1};
    bb84::IdealRspProtocol proto(params);
    long agree = 0;
    const long runs = 5000;
    for (long i = 0; i < runs; ++i) {
        auto prover = proto.make_honest_prover();
        RunResult rr = run_poqm(proto, *prover, static_cast<std::uint64_t>(i));
        auto vsec = bb84::VerifierSecret::parse(rr.verifier_out);
        const auto& theta_msg = rr.exec_transcript.entries.at(0).bytes;
        const auto& x_msg = rr.exec_transcript.entries.at(1).bytes;
        if (bb84::extract(vsec, rr.init_transcript, theta_msg) == x_msg)
            ++agree;
    }
    double gamma_hat = double(agree) / runs;
    // Each qubit flips its matching-basis readout w.p. p/2 = 0.05.
    double expect = std::pow(0.95, 8);
    REQUIRE(gamma_hat < 1.0);
    REQUIRE(std::abs(gamma_hat - expect) < 0.025);
}

TEST_CASE("run_init_phase matches the direct init op structurally") {
    bb84::IdealRspProtocol proto({.n = 6});
    auto prover = proto.make_honest_prover();
    InitOutcome live = run_init_phase(proto, *prover, 9);

    Rng rng(9);
    auto [vs, direct] = bb84::ideal_rsp_init(6, 0.0, rng);
    REQUIRE(live.prover_quantum.n == direct.prover_quantum.n);
    REQUIRE(live.prover_state == direct.prover_state);
    REQUIRE(live.transcript.entries.size() == direct.transcript.entries.size());
    REQUIRE(live.transcript.entries[0].kind == MsgKind::qenvelope);
    auto live_vs = bb84::VerifierSecret::parse(live.verifier_out);
    REQUIRE(qsim::fidelity(live.prover_quantum, live_vs.desc) ==
            Approx(1.0));
}

TEST_CASE("honest acceptance tracks 1 - fail_prob") {
    ProtocolParams params{.n = 6};
    params.fail_prob = 0.25;
    bb84::IdealRspProtocol proto(params);
    auto prover = proto.make_honest_prover();
    long accepted = 0;
    const long runs = 4000;
    for (long i = 0; i < runs; ++i)
        if (run_poqm(proto, *prover, static_cast<std::uint64_t>(i))
                .verdict.accepted)
            ++accepted;
    REQUIRE(std::abs(double(accepted) / runs - 0.75) < 0.025);
}
