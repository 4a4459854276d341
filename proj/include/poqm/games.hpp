#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "poqm/adversary.hpp"
#include "poqm/bb84.hpp"
#include "poqm/puzzle.hpp"
#include "poqm/qsim.hpp"
#include "poqm/stats.hpp"

namespace poqm::games {

/// xi = -log2(1/2 + 1/(2*sqrt(2))), the per-qubit guessing constant behind
/// the leakage bound; numerically about 0.22844 (> 0.22).
inline double xi() {
    return -std::log2(0.5 + 0.5 / std::sqrt(2.0));
}

struct LoccBound {
    double raw = 0.0;
    bool vacuous = false;  // raw >= 1: the bound says nothing at this size
};

/// Closed form of the leakage bound: 2^(-xi*n/2 + 2^-n). Vacuous values are
/// reported as-is, never clamped; the bound only bites for large enough n.
inline LoccBound locc_bound(int n) {
    if (n < 1) throw std::invalid_argument("locc_bound needs n >= 1");
    double raw = std::exp2(-xi() * n / 2.0 + std::exp2(-n));
    return {raw, raw >= 1.0};
}

struct BoundSpec {
    enum class Name { locc, amplification, puzzle_2k };

    Name name = Name::locc;
    int param = 1;      // n for locc, m2 for amplification, k for puzzle_2k
    double xi_value = -std::log2(0.5 + 0.5 / std::sqrt(2.0));

    double raw() const {
        switch (name) {
            case Name::locc: return locc_bound(param).raw;
            case Name::amplification: return std::exp2(param);
            case Name::puzzle_2k: return std::exp2(-param);
        }
        return 0.0;
    }
    bool vacuous() const { return raw() >= 1.0; }
    std::string note() const {
        if (name == Name::puzzle_2k)
            return "computational slack omitted";
        if (name == Name::amplification)
            return "soundness multiplier 2^m2";
        return "";
    }
};

/**
 * One round of the multi-round LOCC leakage game. The challenger samples
 * (x, theta), prepares the BB84 register and keeps it for the whole game;
 * each adversary round runs on the challenger's state and only its
 * classical leakage crosses back. The final guess is a function of
 * (L_1..L_N, theta) alone — a round can keep a post-state with the
 * challenger, but nothing quantum ever reaches the guesser.
 */
inline bool locc_leakage_game(const adversary::LoccStrategy& strat, int n,
                              Rng& rng) {
    if (strat.rounds < 1 || !strat.round_fn || !strat.guess_fn)
        throw HarnessError("malformed leakage strategy");
    qsim::Bb84Description desc = qsim::random_bb84(n, rng);
    qsim::BlockedState state = qsim::BlockedState::from_bb84(desc);
    std::vector<std::string> leaks;
    for (int i = 0; i < strat.rounds; ++i)
        leaks.push_back(strat.round_fn(i, leaks, state, rng));
    std::string guess = strat.guess_fn(leaks, desc.theta, rng);
    return guess == desc.x;
}

enum class Hybrid { h0 = 0, h1 = 1, h2 = 2, h3 = 3 };

struct HybridParams {
    int m2 = 1;
    double fail_prob = 0.0;
    int n_override = 0;  // 0: use ceil(9.1 * m2)

    int n() const { return n_override > 0 ? n_override : bb84::n_for_m2(m2); }
};

/**
 * One round of the soundness-proof hybrids for the RSP-compiled protocol.
 *   h0: the original game, ideal RSP delivering the exact state.
 *   h1: the simulator replaced by the ideal functionality (identical here
 *       by construction, kept as its own label).
 *   h2: the verifier always passes and sends the exact BB84 state.
 *   h3: h2 with the adversary's retained register measured computationally
 *       at the boundary; P2* runs on (s, |p><p|).
 * Substream use is identical across hybrids so equal-distribution hybrids
 * produce equal estimates under one seed scheme.
 */
inline bool run_hybrid(Hybrid which, const HybridParams& hp,
                       const adversary::Strategy& strat, Rng& rng) {
    const int n = hp.n();
    Rng rflag = rng.child(0), rdesc = rng.child(1), rsplit = rng.child(2),
        rfresh = rng.child(3), ranswer = rng.child(4), rmeas = rng.child(5);

    bool pass = true;
    if (which == Hybrid::h0 || which == Hybrid::h1)
        pass = hp.fail_prob == 0.0 || rflag.uniform() >= hp.fail_prob;

    qsim::Bb84Description desc = qsim::random_bb84(n, rdesc);
    adversary::Memory mem =
        strat.split(qsim::BlockedState::from_bb84(desc), rsplit);
    if (mem.rho.n != strat.m2())
        throw HarnessError("strategy carried " + std::to_string(mem.rho.n) +
                           " qubits, declared " + std::to_string(strat.m2()));

    qsim::QReg carried = std::move(mem.rho);
    if (which == Hybrid::h3 && carried.n > 0) {
        std::vector<int> all(static_cast<std::size_t>(carried.n));
        for (int i = 0; i < carried.n; ++i) all[static_cast<std::size_t>(i)] = i;
        auto [p, rest] = qsim::measure_subset_computational(carried, all, rmeas);
        carried = qsim::new_register(static_cast<int>(p.size()));
        carried.amps[0] = 0.0;
        std::size_t idx = 0;
        for (char c : p) idx = idx * 2 + (c == '1');
        carried.amps[idx] = 1.0;
    }

    std::string theta_sent = pass ? desc.theta : rfresh.bits(n);
    std::string x_prime = strat.answer(mem.s, carried, theta_sent, ranswer);
    return pass && x_prime == desc.x;
}

/// The real (beta, m2)-soundness game of the BB84 protocols, estimated over
/// seeded trials. Equivalent to Hybrid 0.
inline Estimate bb84_soundness_estimate(int n, double fail_prob,
                                        const adversary::Strategy& strat,
                                        long trials, std::uint64_t seed) {
    HybridParams hp{strat.m2(), fail_prob, n};
    return estimate_acceptance(
        [&](Rng& r) { return run_hybrid(Hybrid::h0, hp, strat, r); }, trials,
        seed);
}

// ---------------------------------------------------------------------------
// Exact small-instance evaluator.

namespace detail {

enum class QubitHandling { retained, retained_measured, angle };

struct QubitPlan {
    QubitHandling handling;
    double angle = 0.0;
};

inline std::vector<QubitPlan> plan_for(const adversary::StrategyDescriptor& d,
                                       int n) {
    using Kind = adversary::StrategyDescriptor::Kind;
    std::vector<QubitPlan> plan(static_cast<std::size_t>(n));
    switch (d.kind) {
        case Kind::classical_basis_guess:
            for (int q = 0; q < n; ++q)
                plan[static_cast<std::size_t>(q)] = {QubitHandling::angle,
                                                     d.angle_for(q)};
            return plan;
        case Kind::breidbart:
            for (int q = 0; q < n; ++q)
                plan[static_cast<std::size_t>(q)] = {
                    QubitHandling::angle, adversary::kBreidbartAngle};
            return plan;
        case Kind::keep_subset: {
            if (!d.fallback)
                throw std::invalid_argument("keep_subset needs a fallback");
            auto fb = plan_for(*d.fallback, n);
            for (int q = 0; q < n; ++q) plan[static_cast<std::size_t>(q)] = fb[static_cast<std::size_t>(q)];
            for (int q : d.kept)
                plan.at(static_cast<std::size_t>(q)) = {
                    d.measured ? QubitHandling::retained_measured
                               : QubitHandling::retained,
                    0.0};
            return plan;
        }
        default:
            throw std::invalid_argument(
                "exact evaluation unsupported for strategy kind");
    }
}

// Exact per-qubit success probability given (x, theta).
inline double qubit_success(const QubitPlan& p, int x, int th) {
    switch (p.handling) {
        case QubitHandling::retained:
            return 1.0;  // measured later in the revealed basis
        case QubitHandling::retained_measured:
            // Computational collapse first: theta=0 survives exactly,
            // theta=1 rebuilds a basis state whose Hadamard readout is fair.
            return th == 0 ? 1.0 : 0.5;
        case QubitHandling::angle: {
            const double c = std::cos(p.angle), s = std::sin(p.angle);
            double a0, a1;  // H^th |x>
            if (th == 0) {
                a0 = x == 0 ? 1.0 : 0.0;
                a1 = x == 0 ? 0.0 : 1.0;
            } else {
                a0 = qsim::kInvSqrt2;
                a1 = x == 0 ? qsim::kInvSqrt2 : -qsim::kInvSqrt2;
            }
            double amp = x == 0 ? c * a0 + s * a1 : -s * a0 + c * a1;
            return amp * amp;
        }
    }
    return 0.0;
}

}  // namespace detail

/**
 * Exact acceptance of the BB84 soundness game for a descriptor-expressible
 * strategy, by full enumeration over every (x, theta) pair and all
 * measurement outcomes. No sampling. Supports the classical-guess /
 * breidbart / keep-subset family and their measured transforms; kept to
 * n <= 10 (the buildable checks need n <= 4).
 */
inline double exact_bb84_game_acceptance(
    const adversary::StrategyDescriptor& d, int n) {
    if (n < 1 || n > 10)
        throw CapacityError("exact evaluator supports n in [1, 10]");
    auto plan = detail::plan_for(d, n);
    double acc = 0.0;
    const std::size_t combos = std::size_t{1} << (2 * n);
    for (std::size_t pattern = 0; pattern < combos; ++pattern) {
        double prod = 1.0;
        for (int q = 0; q < n && prod > 0.0; ++q) {
            int x = static_cast<int>(pattern >> (2 * q)) & 1;
            int th = static_cast<int>(pattern >> (2 * q + 1)) & 1;
            prod *= detail::qubit_success(plan[static_cast<std::size_t>(q)], x, th);
        }
        acc += prod;
    }
    return acc / static_cast<double>(combos);
}

// ---------------------------------------------------------------------------
// Measurement-insertion check (exact).

struct BzGate {
    qsim::Unitary u;
    std::vector<int> targets;
};

struct BzCircuit {
    qsim::QReg initial;
    std::vector<BzGate> gates;
};

struct BzInsertion {
    int step = 0;                // gates executed before the measurement
    std::vector<int> qubits;     // measured set; k = 2^|qubits|
};

struct BzReport {
    std::vector<double> p_original;
    std::vector<double> p_inserted;
    int k = 1;
    bool ok = false;
    double worst_slack = 0.0;  // min over outcomes of p' - p/k
};

/**
 * Exact check of the measurement-insertion inequality: running the circuit
 * with a k-outcome computational measurement spliced in at `step` must give
 * p'(outcome) >= p(outcome)/k for every final outcome. Both distributions
 * are computed by exhaustive branch enumeration on registers of at most 6
 * qubits; a violation beyond float tolerance indicates a simulator bug.
 */
inline BzReport check_bz(const BzCircuit& circuit,
                         const BzInsertion& insertion) {
    const int n = circuit.initial.n;
    if (n < 1 || n > 6) throw CapacityError("check_bz supports 1..6 qubits");
    if (insertion.step < 0 ||
        insertion.step > static_cast<int>(circuit.gates.size()))
        throw std::invalid_argument("insertion step out of range");

    auto run_gates = [&](qsim::QReg reg, std::size_t from) {
        for (std::size_t g = from; g < circuit.gates.size(); ++g)
            reg = qsim::apply_unitary(reg, circuit.gates[g].u,
                                      circuit.gates[g].targets);
        return reg;
    };

    BzReport rep;
    const std::size_t dim = circuit.initial.dim();

    qsim::QReg full = run_gates(circuit.initial, 0);
    rep.p_original.resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
        rep.p_original[i] = std::norm(full.amps[i]);

    qsim::QReg mid = circuit.initial;
    for (int g = 0; g < insertion.step; ++g)
        mid = qsim::apply_unitary(mid, circuit.gates[static_cast<std::size_t>(g)].u,
                                  circuit.gates[static_cast<std::size_t>(g)].targets);

    const int mbits = static_cast<int>(insertion.qubits.size());
    rep.k = 1 << mbits;
    rep.p_inserted.assign(dim, 0.0);
    for (int branch = 0; branch < rep.k; ++branch) {
        std::string bits;
        for (int b = 0; b < mbits; ++b)
            bits.push_back((branch >> (mbits - 1 - b)) & 1 ? '1' : '0');
        auto [prob, collapsed] =
            qsim::project_computational_keep(mid, insertion.qubits, bits);
        if (prob <= 0.0) continue;
        qsim::QReg fin = run_gates(std::move(collapsed),
                                   static_cast<std::size_t>(insertion.step));
        for (std::size_t i = 0; i < dim; ++i)
            rep.p_inserted[i] += prob * std::norm(fin.amps[i]);
    }

    rep.ok = true;
    rep.worst_slack = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
        double slack = rep.p_inserted[i] - rep.p_original[i] / rep.k;
        rep.worst_slack = std::min(rep.worst_slack, slack);
        if (slack < -1e-9) rep.ok = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Amplification and Jensen reports.

struct AmplificationReport {
    int m2 = 0;
    double acc_m2 = 0.0;        // original strategy
    double acc_measured = 0.0;  // after the measured-adversary transform
    double ratio = 0.0;
    bool ok = false;            // acc_m2 <= 2^m2 * acc_measured (+ slack)
    std::string mode;
};

/// Exact amplification comparison by full enumeration; the stated pre of
/// the exact route is n <= 4 and m2 <= 2.
inline AmplificationReport amplification_report_exact(
    const adversary::StrategyDescriptor& d, int n) {
    if (n > 4 || d.m2 > 2)
        throw std::invalid_argument("exact mode requires n <= 4 and m2 <= 2");
    adversary::StrategyDescriptor measured = d;
    measured.measured = true;
    measured.m2 = 0;

    AmplificationReport rep;
    rep.mode = "exact";
    rep.m2 = d.m2;
    rep.acc_m2 = exact_bb84_game_acceptance(d, n);
    rep.acc_measured = exact_bb84_game_acceptance(measured, n);
    rep.ratio = rep.acc_measured > 0 ? rep.acc_m2 / rep.acc_measured
                                     : std::numeric_limits<double>::infinity();
    rep.ok = rep.acc_m2 <= std::exp2(d.m2) * rep.acc_measured + 1e-12;
    return rep;
}

/// Monte-Carlo amplification comparison on the real soundness game.
inline AmplificationReport amplification_report_mc(int n, double fail_prob,
                                                   adversary::StrategyPtr strat,
                                                   long trials,
                                                   std::uint64_t seed) {
    auto measured = adversary::measure_inserted(strat);
    Estimate orig = bb84_soundness_estimate(n, fail_prob, *strat, trials, seed);
    Estimate meas =
        bb84_soundness_estimate(n, fail_prob, *measured, trials, seed + 1);
    AmplificationReport rep;
    rep.mode = "monte-carlo";
    rep.m2 = strat->m2();
    rep.acc_m2 = orig.p_hat;
    rep.acc_measured = meas.p_hat;
    rep.ratio = meas.p_hat > 0 ? orig.p_hat / meas.p_hat
                               : std::numeric_limits<double>::infinity();
    double slack = 3.0 * std::sqrt(orig.se() * orig.se() +
                                   std::exp2(2.0 * strat->m2()) * meas.se() *
                                       meas.se());
    rep.ok = orig.p_hat <= std::exp2(strat->m2()) * meas.p_hat + slack;
    return rep;
}

struct JensenReport {
    Estimate single;
    Estimate both;
    double slack = 0.0;  // 3 combined standard errors
    bool ok = false;     // both >= single^2 - slack
};

/// Runs the single-prover game and the (A, B, C) game built from the same
/// pair on matching per-trial substreams, and checks the squaring direction
/// of the reduction: Pr[both accept] >= Pr[single accept]^2 within noise.
inline JensenReport jensen_report(int n, int k,
                                  const puzzle::SingleProverPair& pair,
                                  long trials, std::uint64_t seed) {
    puzzle::AbcFromPair abc = puzzle::pair_from_single(pair);
    JensenReport rep;
    rep.single = estimate_acceptance(
        [&](Rng& r) { return puzzle::run_single_prover_game(n, k, pair, r); },
        trials, seed);
    rep.both = estimate_acceptance(
        [&](Rng& r) {
            return puzzle::run_abc_game(n, k, abc.a, *abc.b, *abc.c, r);
        },
        trials, seed);
    double se_sq = 2.0 * rep.single.p_hat * rep.single.se();
    rep.slack = 3.0 * std::sqrt(rep.both.se() * rep.both.se() + se_sq * se_sq);
    rep.ok = rep.both.p_hat >= rep.single.p_hat * rep.single.p_hat - rep.slack;
    return rep;
}

}  // namespace poqm::games
