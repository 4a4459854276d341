#pragma once

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "poqm/bb84.hpp"
#include "poqm/core.hpp"
#include "poqm/stats.hpp"

namespace poqm::derived {

using json = nlohmann::ordered_json;

/// A sampled state puzzle: the classical puzzle s = (state, tau) and the
/// description of the pure answer. Attackers receive s only; the target is
/// evaluator-side data, and tau carries no bit of (x, theta) because the
/// ideal-RSP init transcript is a content-free envelope marker.
struct StatePuzzInstance {
    std::string s;
    qsim::Bb84Description target;
};

inline StatePuzzInstance statepuzz_samp(int n, Rng& rng) {
    auto [vs, init] = bb84::ideal_rsp_init(n, 0.0, rng);
    json j;
    j["state"] = to_hex(init.prover_state);
    j["tau"] = to_hex(init.transcript.serialize());
    return {j.dump(), vs.desc};
}

/// Attacker in the puzzle security game: consumes the classical puzzle only
/// and outputs an n-qubit register.
using StatePuzzAttacker =
    std::function<qsim::QReg(const std::string& s, Rng& rng)>;

/**
 * Mean output fidelity of an attacker over fresh instances. Each trial
 * performs the projective check against |psi_s> (a Bernoulli draw with the
 * exact fidelity as its parameter), so the returned Estimate is a true
 * binomial proportion with an exact Clopper-Pearson interval around the
 * mean fidelity.
 */
inline games::Estimate statepuzz_attack_eval(int n,
                                             const StatePuzzAttacker& attacker,
                                             long trials, std::uint64_t seed) {
    return games::estimate_acceptance(
        [&, n](Rng& r) {
            Rng rs = r.child(0), ra = r.child(1), rm = r.child(2);
            StatePuzzInstance inst = statepuzz_samp(n, rs);
            qsim::QReg guess = attacker(inst.s, ra);
            if (guess.n != n)
                throw std::invalid_argument(
                    "attacker output register size mismatch");
            double f = qsim::fidelity(guess, inst.target);
            return rm.uniform() < f;
        },
        trials, seed);
}

struct ReductionReport {
    games::Estimate fidelity;
    games::Estimate acceptance;
    bool ok = false;  // acceptance >= fidelity - 3 combined SE
};

/**
 * The reduction direction of the lowerbound: wiring an attacker's output
 * register into the execution-phase prover must accept at least as often as
 * the projective fidelity check passes. With a null attacker the honest
 * register itself is wired in (fidelity exactly 1, acceptance exactly 1).
 */
inline ReductionReport statepuzz_reduction_report(
    int n, const StatePuzzAttacker& attacker, long trials,
    std::uint64_t seed) {
    long fid_wins = 0, acc_wins = 0;
    Rng root(seed);
    for (long i = 0; i < trials; ++i) {
        Rng r = root.child(static_cast<std::uint64_t>(i));
        Rng rs = r.child(0), ra = r.child(1), rm = r.child(2),
            rx = r.child(3);
        StatePuzzInstance inst = statepuzz_samp(n, rs);
        qsim::QReg guess = attacker ? attacker(inst.s, ra)
                                    : qsim::prepare_bb84(inst.target);
        if (guess.n != n)
            throw std::invalid_argument("attacker output register size mismatch");
        if (rm.uniform() < qsim::fidelity(guess, inst.target)) ++fid_wins;
        std::string x_prime =
            bb84::execute_prover(std::move(guess), inst.target.theta, rx);
        if (x_prime == inst.target.x) ++acc_wins;
    }
    ReductionReport rep;
    rep.fidelity = games::make_estimate(trials, fid_wins);
    rep.acceptance = games::make_estimate(trials, acc_wins);
    double se = 3 * std::sqrt(rep.fidelity.se() * rep.fidelity.se() +
                              rep.acceptance.se() * rep.acceptance.se());
    rep.ok = rep.acceptance.p_hat >= rep.fidelity.p_hat - se;
    return rep;
}

/// One key-exchange run. Alice plays the prover, Bob the verifier; Bob never
/// receives Alice's execution message and instead extracts it from (v, tau,
/// theta). The shared key is that message. The public transcript is the
/// init envelope plus the theta message; neither key appears in it.
struct KeOutcome {
    std::string a;   // Alice's key (the measured y)
    std::string b;   // Bob's key (the extracted y')
    Transcript tau;
    int retries = 0;  // failed-RSP retries, counted rather than hidden
};

inline KeOutcome ke_run(int n, double fail_prob,
                        const std::optional<HoldSpec>& hold, Rng& rng) {
    KeOutcome out;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 1000)
            throw std::runtime_error("ke_run: RSP kept failing");
        Rng r = rng.child(static_cast<std::uint64_t>(attempt));
        Rng rinit = r.child(0), rhold = r.child(1), rmeas = r.child(2);
        auto [vs, init] = bb84::ideal_rsp_init(n, fail_prob, rinit);
        if (!vs.pass) {
            ++out.retries;
            continue;
        }
        qsim::QReg reg = std::move(init.prover_quantum);
        if (hold && hold->depolarize > 0.0)
            for (int q = 0; q < reg.n; ++q)
                reg = qsim::depolarize(reg, q, hold->depolarize, rhold);

        out.tau = init.transcript;
        out.tau.entries.push_back(
            {Role::verifier, MsgKind::classical, vs.desc.theta});
        out.a = bb84::execute_prover(std::move(reg), vs.desc.theta, rmeas);
        out.b = bb84::extract(vs, init.transcript, vs.desc.theta);
        return out;
    }
}

inline games::Estimate ke_agreement(int n, double fail_prob,
                                    const std::optional<HoldSpec>& hold,
                                    long trials, std::uint64_t seed) {
    return games::estimate_acceptance(
        [&, n](Rng& r) {
            KeOutcome out = ke_run(n, fail_prob, hold, r);
            return out.a == out.b;
        },
        trials, seed);
}

/// Transcript-only eavesdropper: maps tau to an n-bit key guess.
using Eve = std::function<std::string(const Transcript& tau, Rng& rng)>;

inline games::Estimate ke_eve_eval(int n, const Eve& eve, long trials,
                                   std::uint64_t seed) {
    return games::estimate_acceptance(
        [&, n](Rng& r) {
            Rng rrun = r.child(0), reve = r.child(1);
            KeOutcome out = ke_run(n, 0.0, std::nullopt, rrun);
            return eve(out.tau, reve) == out.a;
        },
        trials, seed);
}

}  // namespace poqm::derived
