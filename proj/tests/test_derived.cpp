#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "poqm/derived.hpp"

using namespace poqm;
using namespace poqm::derived;
using Catch::Approx;

TEST_CASE("statepuzz instances carry no secret bits") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        StatePuzzInstance inst = statepuzz_samp(8, rng);
        nlohmann::json j = nlohmann::json::parse(inst.s);
        // state is empty and tau is exactly the content-free envelope
        // marker; neither x nor theta can be embedded anywhere.
        REQUIRE(j.at("state").get<std::string>().empty());
        Transcript marker;
        marker.entries.push_back(
            {Role::verifier, MsgKind::qenvelope, "bb84-envelope"});
        REQUIRE(j.at("tau").get<std::string>() ==
                to_hex(marker.serialize()));
    }
}

TEST_CASE("statepuzz target marginals are uniform") {
    int ones_x = 0, ones_t = 0;
    const int seeds = 3000, n = 8;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(static_cast<std::uint64_t>(s));
        StatePuzzInstance inst = statepuzz_samp(n, rng);
        for (char c : inst.target.x) ones_x += c == '1';
        for (char c : inst.target.theta) ones_t += c == '1';
    }
    REQUIRE(std::abs(double(ones_x) / (seeds * n) - 0.5) < 0.02);
    REQUIRE(std::abs(double(ones_t) / (seeds * n) - 0.5) < 0.02);
}

TEST_CASE("honest register composes to fidelity 1 and acceptance 1") {
    ReductionReport rep = statepuzz_reduction_report(8, nullptr, 2000, 1);
    REQUIRE(rep.fidelity.p_hat == 1.0);
    REQUIRE(rep.acceptance.p_hat == 1.0);
    REQUIRE(rep.ok);
}

TEST_CASE("s-only attackers score at most 2^-n") {
    const int n = 8;
    const double target = std::exp2(-n);

    StatePuzzAttacker zeros = [n](const std::string&, Rng&) {
        return qsim::new_register(n);
    };
    games::Estimate e0 = statepuzz_attack_eval(n, zeros, 20000, 2);
    REQUIRE(e0.ci_low <= target);
    REQUIRE(e0.ci_high >= target);
    REQUIRE(e0.p_hat <= target + 3 * e0.se() + 1e-6);

    // Any fixed product guess averages 2^-n as well: the mean BB84 state is
    // maximally mixed.
    StatePuzzAttacker random_bb84_guess = [n](const std::string&, Rng& rng) {
        return qsim::prepare_bb84(qsim::random_bb84(n, rng));
    };
    games::Estimate e1 = statepuzz_attack_eval(n, random_bb84_guess, 20000, 3);
    REQUIRE(e1.p_hat <= target + 3 * e1.se() + 1e-6);

    StatePuzzAttacker wrong_size = [](const std::string&, Rng&) {
        return qsim::new_register(3);
    };
    REQUIRE_THROWS_AS(statepuzz_attack_eval(n, wrong_size, 200, 4),
                      std::invalid_argument);
}

TEST_CASE("attacker reduction: acceptance dominates fidelity") {
    const int n = 8;
    StatePuzzAttacker zeros = [n](const std::string&, Rng&) {
        return qsim::new_register(n);
    };
    ReductionReport rep = statepuzz_reduction_report(n, zeros, 20000, 5);
    REQUIRE(rep.ok);
}

TEST_CASE("key exchange agrees perfectly without noise") {
    games::Estimate agree = ke_agreement(8, 0.0, std::nullopt, 10000, 6);
    REQUIRE(agree.p_hat == 1.0);

    Rng rng(7);
    KeOutcome out = ke_run(8, 0.0, std::nullopt, rng);
    REQUIRE(out.a.size() == 8);
    REQUIRE(out.a == out.b);
    REQUIRE(out.retries == 0);
    // Public transcript: the envelope marker plus the theta message only.
    REQUIRE(out.tau.entries.size() == 2);
    REQUIRE(out.tau.entries[0].kind == MsgKind::qenvelope);
    REQUIRE(out.tau.entries[1].sender == Role::verifier);
}

TEST_CASE("key exchange counts RSP retries") {
    int saw_retry = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        KeOutcome out = ke_run(4, 0.5, std::nullopt, rng);
        REQUIRE(out.a == out.b);
        if (out.retries > 0) ++saw_retry;
    }
    REQUIRE(saw_retry > 50);
}

TEST_CASE("hold noise lowers the agreement as computed") {
    const int n = 8;
    const double p = 0.05;
    games::Estimate agree =
        ke_agreement(n, 0.0, HoldSpec{0, p}, 20000, 8);
    REQUIRE(agree.p_hat < 1.0);
    double expect = std::pow(1.0 - p / 2.0, n);
    REQUIRE(agree.p_hat == Approx(expect).margin(0.015));
}

TEST_CASE("transcript-only eavesdroppers score 2^-n") {
    const int n = 8;
    const double target = std::exp2(-n);

    Eve zeros = [n](const Transcript&, Rng&) { return std::string(n, '0'); };
    games::Estimate e0 = ke_eve_eval(n, zeros, 20000, 9);
    REQUIRE(e0.ci_low <= target);
    REQUIRE(e0.ci_high >= target);

    // Echoing theta back is still independent of x.
    Eve echo_theta = [](const Transcript& tau, Rng&) {
        return tau.entries.at(1).bytes;
    };
    games::Estimate e1 = ke_eve_eval(n, echo_theta, 20000, 10);
    REQUIRE(e1.p_hat <= target + 3 * e1.se() + 1e-6);

    games::Estimate e4 = ke_eve_eval(4, [](const Transcript&, Rng&) {
        return std::string(4, '0');
    }, 20000, 11);
    REQUIRE(e4.p_hat == Approx(std::exp2(-4)).margin(0.008));
}
