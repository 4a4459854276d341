// poqm: proofs-of-quantum-memory protocol laboratory.
//
// Subcommands: run, game (locc|bz|amplification|jensen), bounds, hybrid,
// ke, statepuzz, verifier, prover, report. Every experiment is seeded and
// replays bit-identically; reports carry exact Clopper-Pearson intervals
// next to the closed-form bound they are measured against.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <map>
#include <iostream>
#include <optional>

#include "poqm/adversary.hpp"
#include "poqm/derived.hpp"
#include "poqm/games.hpp"
#include "poqm/net.hpp"
#include "poqm/protocols.hpp"
#include "poqm/report.hpp"

using namespace poqm;
using report::Report;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 =
        std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void print_summary(const Report& rep) {
    std::cout << "experiment: " << rep.experiment << " (seed " << rep.seed
              << ")\n";
    for (const auto& ne : rep.estimates) {
        std::cout << "  " << ne.name << ": p_hat=" << ne.est.p_hat << " ci=["
                  << ne.est.ci_low << "," << ne.est.ci_high << "] trials="
                  << ne.est.trials;
        if (ne.est.bound)
            std::cout << " bound=" << *ne.est.bound
                      << (ne.est.bound_vacuous ? " (vacuous)" : "");
        std::cout << "\n";
    }
    for (const auto& g : rep.gates)
        std::cout << "  gate " << g.name << ": " << (g.pass ? "PASS" : "FAIL")
                  << "\n";
}

int finish(Report rep, const Timer& timer, const std::string& out_path,
           const std::string& format) {
    rep.wall_ms = timer.ms();
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) {
            std::cerr << "cannot write " << out_path << "\n";
            return 1;
        }
        f << report::emit(rep, format);
    }
    print_summary(rep);
    return rep.all_pass() ? 0 : 1;
}

struct ProtoOpts {
    std::string protocol = "bb84-it";
    int n = 8;
    int k = 2;
    int m2 = 0;
    double fail_prob = 0.0;
    int hold_ms = 0;
    double depolarize = 0.0;

    ProtocolParams params() const {
        ProtocolParams p;
        p.n = (protocol == "bb84-rsp" && m2 > 0) ? bb84::n_for_m2(m2) : n;
        p.k = k;
        p.fail_prob = fail_prob;
        if (hold_ms > 0 || depolarize > 0.0)
            p.hold = HoldSpec{hold_ms, depolarize};
        return p;
    }
};

void add_proto_flags(CLI::App* cmd, ProtoOpts& po) {
    cmd->add_option("--protocol", po.protocol, "bb84-it | bb84-rsp | puzzle")
        ->check(CLI::IsMember({"bb84-it", "bb84-rsp", "puzzle"}));
    cmd->add_option("--n", po.n, "register / bit-string length");
    cmd->add_option("--k", po.k, "challenge length (puzzle)");
    cmd->add_option("--m2", po.m2,
                    "memory bound; sets n = ceil(9.1*m2) for bb84-rsp");
    cmd->add_option("--fail-prob", po.fail_prob, "ideal-RSP fail probability");
    cmd->add_option("--hold-ms", po.hold_ms, "hold duration (networked mode)");
    cmd->add_option("--depolarize", po.depolarize,
                    "per-qubit hold depolarization probability");
}

// Three named single-prover pairs for the jensen experiment.
puzzle::SingleProverPair make_jensen_pair(const std::string& name, int n) {
    puzzle::SingleProverPair pair;
    pair.m2 = 0;
    if (name == "deterministic") {
        pair.p1 = [](const std::string&, qsim::BlockedState handed, Rng& rng) {
            std::string bits;
            for (int q = 0; q < handed.qubits(); ++q)
                bits.push_back(handed.measure_angle(q, 0.0, rng) ? '1' : '0');
            return std::make_tuple(std::string{}, bits, qsim::QReg::scalar());
        };
        pair.p2 = [](const std::string& s, qsim::QReg&,
                     const puzzle::Challenge&, Rng&) { return s; };
        return pair;
    }
    if (name == "uniform") {
        pair.p1 = [](const std::string&, qsim::BlockedState, Rng&) {
            return std::make_tuple(std::string{}, std::string{},
                                   qsim::QReg::scalar());
        };
        pair.p2 = [n](const std::string&, qsim::QReg&,
                      const puzzle::Challenge&, Rng& rng) {
            return rng.bits(n);
        };
        return pair;
    }
    if (name == "honest-info") {
        pair.p1 = [](const std::string& pk, qsim::BlockedState handed,
                     Rng& rng) {
            std::string bits;
            for (int q = 0; q < handed.qubits(); ++q)
                bits.push_back(handed.measure_angle(q, 0.0, rng) ? '1' : '0');
            return std::make_tuple(std::string{}, pk + "|" + bits,
                                   qsim::QReg::scalar());
        };
        pair.p2 = [](const std::string& s, qsim::QReg&,
                     const puzzle::Challenge& ch, Rng& rng) {
            auto bar = s.find('|');
            puzzle::BlockLayout layout =
                puzzle::BlockLayout::parse(s.substr(0, bar));
            std::string out = s.substr(bar + 1);
            for (int i = 0; i < layout.n; ++i)
                if (ch.ch[static_cast<std::size_t>(layout.block_of(i))] == '1')
                    out[static_cast<std::size_t>(i)] = rng.bit() ? '1' : '0';
            return out;
        };
        return pair;
    }
    throw CLI::ValidationError("--pair",
                               "unknown pair (deterministic|uniform|honest-info)");
}

std::pair<int, int> parse_range(const std::string& spec) {
    auto dots = spec.find("..");
    if (dots == std::string::npos) {
        int v = std::stoi(spec);
        return {v, v};
    }
    return {std::stoi(spec.substr(0, dots)), std::stoi(spec.substr(dots + 2))};
}

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"proofs-of-quantum-memory protocol laboratory"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config");

    std::uint64_t seed = 1;
    long trials = 10000;
    std::string out_path, format = "json";
    app.add_option("--seed", seed, "master seed")->envname("POQM_SEED");
    app.add_option("--trials", trials, "Monte-Carlo trials");
    app.add_option("--out", out_path, "write the report to this path");
    app.add_option("--format", format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));

    // ---- run ----------------------------------------------------------
    auto* run_cmd = app.add_subcommand(
        "run", "run a protocol session repeatedly and estimate acceptance");
    ProtoOpts run_po;
    std::string run_strategy = "honest";
    add_proto_flags(run_cmd, run_po);
    run_cmd->add_option("--strategy", run_strategy,
                        "prover strategy descriptor (default honest)");

    // ---- game ----------------------------------------------------------
    auto* game_cmd = app.add_subcommand("game", "security-game experiments");
    game_cmd->require_subcommand(1);

    auto* locc_cmd = game_cmd->add_subcommand(
        "locc", "LOCC leakage game against the closed-form bound");
    int locc_n = 8;
    std::string locc_strategy = "breidbart";
    locc_cmd->add_option("--n", locc_n, "BB84 string length");
    locc_cmd->add_option("--strategy", locc_strategy, "strategy descriptor");

    auto* bz_cmd = game_cmd->add_subcommand(
        "bz", "measurement-insertion check on randomized circuits (exact)");
    int bz_cases = 100, bz_qubits = 3;
    bz_cmd->add_option("--cases", bz_cases, "randomized circuit count");
    bz_cmd->add_option("--qubits", bz_qubits, "max circuit width (<= 6)");

    auto* amp_cmd = game_cmd->add_subcommand(
        "amplification", "measured-adversary transform comparison");
    int amp_n = 4;
    std::string amp_strategy = "keep:0:breidbart", amp_mode = "exact";
    amp_cmd->add_option("--n", amp_n, "BB84 string length");
    amp_cmd->add_option("--strategy", amp_strategy, "strategy descriptor");
    amp_cmd->add_option("--mode", amp_mode, "exact | mc")
        ->check(CLI::IsMember({"exact", "mc"}));

    auto* jensen_cmd = game_cmd->add_subcommand(
        "jensen", "single-prover vs (A,B,C) squaring comparison");
    int jn = 4, jk = 1;
    std::string jpair = "deterministic";
    jensen_cmd->add_option("--n", jn, "register size");
    jensen_cmd->add_option("--k", jk, "challenge length");
    jensen_cmd->add_option("--pair", jpair,
                           "deterministic | uniform | honest-info");

    // ---- bounds ---------------------------------------------------------
    auto* bounds_cmd =
        app.add_subcommand("bounds", "closed-form bound sweeps");
    std::string lemma = "locc", n_range = "1..16", m2_range = "1..8",
                k_range = "1..8";
    bounds_cmd->add_option("--lemma", lemma, "locc | amplification | puzzle-2k")
        ->check(CLI::IsMember({"locc", "amplification", "puzzle-2k"}));
    bounds_cmd->add_option("--n", n_range, "n range a..b (locc)");
    bounds_cmd->add_option("--m2", m2_range, "m2 range a..b (amplification)");
    bounds_cmd->add_option("--k", k_range, "k range a..b (puzzle-2k)");

    // ---- hybrid ---------------------------------------------------------
    auto* hybrid_cmd = app.add_subcommand(
        "hybrid", "soundness-proof hybrid chain for the RSP-compiled PoQM");
    int hy_m2 = 1;
    double hy_fail = 0.0;
    std::string hy_which = "all", hy_strategy;
    hybrid_cmd->add_option("--m2", hy_m2, "memory bound (n = ceil(9.1*m2))");
    hybrid_cmd->add_option("--which", hy_which, "0|1|2|3|all")
        ->check(CLI::IsMember({"0", "1", "2", "3", "all"}));
    hybrid_cmd->add_option("--strategy", hy_strategy,
                           "strategy descriptor (default keep-first-m2)");
    hybrid_cmd->add_option("--fail-prob", hy_fail, "ideal-RSP fail probability");

    // ---- ke -------------------------------------------------------------
    auto* ke_cmd = app.add_subcommand(
        "ke", "classical-channel key exchange built on the extractable PoQM");
    int ke_n = 8;
    double ke_depol = 0.0, ke_fail = 0.0;
    ke_cmd->add_option("--n", ke_n, "key length");
    ke_cmd->add_option("--depolarize", ke_depol, "hold depolarization");
    ke_cmd->add_option("--fail-prob", ke_fail, "ideal-RSP fail probability");

    // ---- statepuzz ------------------------------------------------------
    auto* sp_cmd = app.add_subcommand(
        "statepuzz", "state-puzzle sampler and fidelity-attack evaluation");
    int sp_n = 8;
    sp_cmd->add_option("--n", sp_n, "register size");

    // ---- verifier / prover ----------------------------------------------
    auto* verifier_cmd =
        app.add_subcommand("verifier", "serve protocol sessions over TCP");
    auto* prover_cmd =
        app.add_subcommand("prover", "run the honest prover against a verifier");
    net::NetConfig vcfg, pcfg;
    ProtoOpts v_po, p_po;
    add_proto_flags(verifier_cmd, v_po);
    verifier_cmd->add_option("--port", vcfg.port, "listen port (0: ephemeral)");
    verifier_cmd->add_option("--port-file", vcfg.port_file,
                             "write the bound port to this file");
    verifier_cmd->add_option("--sessions", vcfg.sessions, "sessions to serve");
    verifier_cmd->add_option("--timeout-ms", vcfg.timeout_ms, "recv timeout");
    add_proto_flags(prover_cmd, p_po);
    prover_cmd->add_option("--host", pcfg.host, "verifier host");
    prover_cmd->add_option("--port", pcfg.port, "verifier port")->required();
    prover_cmd->add_option("--timeout-ms", pcfg.timeout_ms, "recv timeout");

    // ---- report ----------------------------------------------------------
    auto* report_cmd =
        app.add_subcommand("report", "re-emit a stored JSON report");
    std::string rep_in;
    report_cmd->add_option("--in", rep_in, "input report (json)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Timer timer;
    try {
        if (*run_cmd) {
            ProtocolParams params = run_po.params();
            auto proto = make_protocol(run_po.protocol, params);
            auto strat = adversary::parse_strategy(run_strategy, params.n);
            Report rep;
            rep.experiment = "run-" + run_po.protocol;
            rep.seed = seed;
            rep.params["protocol"] = run_po.protocol;
            rep.params["n"] = params.n;
            rep.params["k"] = params.k;
            rep.params["fail_prob"] = params.fail_prob;
            rep.params["strategy"] = strat ? strat->name() : "honest";
            rep.params["trials"] = trials;
            if (params.hold) {
                rep.params["hold_ms"] = params.hold->hold_ms;
                rep.params["depolarize"] = params.hold->depolarize;
            }
            games::Estimate est;
            if (!strat) {
                auto prover = proto->make_honest_prover();
                est = games::estimate_acceptance(
                    [&](Rng& r) {
                        return run_poqm(*proto, *prover, r.next_u64())
                            .verdict.accepted;
                    },
                    trials, seed);
                if (!params.hold && params.fail_prob == 0.0)
                    rep.gates.push_back(
                        {"honest-completeness", est.p_hat == 1.0});
            } else {
                if (run_po.protocol == "puzzle")
                    throw std::invalid_argument(
                        "adversarial puzzle runs: use --strategy measured "
                        "(the only compiled-protocol adversary)");
                adversary::AdversaryProver prover(strat);
                est = games::estimate_acceptance(
                    [&](Rng& r) {
                        return run_poqm(*proto, prover, r.next_u64())
                            .verdict.accepted;
                    },
                    trials, seed);
            }
            rep.estimates.push_back({"acceptance", est});
            return finish(std::move(rep), timer, out_path, format);
        }

        if (*locc_cmd) {
            auto strat = adversary::parse_strategy(locc_strategy, locc_n);
            if (!strat)
                throw std::invalid_argument("locc needs a real strategy");
            auto play = strat->locc_play();
            games::Estimate est = games::estimate_acceptance(
                [&](Rng& r) {
                    return games::locc_leakage_game(play, locc_n, r);
                },
                trials, seed);
            games::LoccBound bound = games::locc_bound(locc_n);
            est = games::with_bound(est, bound.raw);
            Report rep;
            rep.experiment = "game-locc";
            rep.seed = seed;
            rep.params["n"] = locc_n;
            rep.params["strategy"] = strat->name();
            rep.params["trials"] = trials;
            rep.estimates.push_back({"win", est});
            rep.gates.push_back(
                {"locc-bound", est.p_hat <= bound.raw + 3 * est.se()});
            return finish(std::move(rep), timer, out_path, format);
        }

        if (*bz_cmd) {
            if (bz_qubits < 1 || bz_qubits > 6)
                throw std::invalid_argument("bz --qubits must be in [1, 6]");
            Rng rng(seed);
            int violations = 0;
            double worst = 1.0;
            // The tight case first: |+>, H, computational insertion.
            games::BzCircuit tight;
            tight.initial = qsim::prepare_bb84({1, "0", "1"});
            tight.gates.push_back({qsim::gate::h(), {0}});
            games::BzReport t = games::check_bz(tight, {0, {0}});
            if (!t.ok) ++violations;
            worst = std::min(worst, t.worst_slack);
            for (int c = 0; c < bz_cases; ++c) {
                int n = 1 + static_cast<int>(rng.below(
                                static_cast<std::uint64_t>(bz_qubits)));
                games::BzCircuit circuit;
                circuit.initial = qsim::new_register(n);
                int depth = 1 + static_cast<int>(rng.below(5));
                for (int g = 0; g < depth; ++g) {
                    if (n >= 2 && rng.bit()) {
                        int a = static_cast<int>(
                            rng.below(static_cast<std::uint64_t>(n)));
                        int b =
                            (a + 1 +
                             static_cast<int>(rng.below(
                                 static_cast<std::uint64_t>(n - 1)))) %
                            n;
                        circuit.gates.push_back({qsim::gate::cnot(), {a, b}});
                    } else {
                        int q = static_cast<int>(
                            rng.below(static_cast<std::uint64_t>(n)));
                        double a1 = rng.uniform() * M_PI,
                               a2 = rng.uniform() * M_PI;
                        circuit.gates.push_back(
                            {qsim::gate::basis_rotation(a1), {q}});
                        circuit.gates.push_back({qsim::gate::h(), {q}});
                        circuit.gates.push_back(
                            {qsim::gate::basis_rotation(a2), {q}});
                    }
                }
                games::BzInsertion ins;
                ins.step = static_cast<int>(rng.below(
                    static_cast<std::uint64_t>(circuit.gates.size() + 1)));
                for (int q = 0; q < n; ++q)
                    if (rng.bit() || (q == n - 1 && ins.qubits.empty()))
                        ins.qubits.push_back(q);
                games::BzReport rep_i = games::check_bz(circuit, ins);
                if (!rep_i.ok) ++violations;
                worst = std::min(worst, rep_i.worst_slack);
            }
            Report rep;
            rep.experiment = "game-bz";
            rep.seed = seed;
            rep.params["cases"] = bz_cases;
            rep.params["qubits"] = bz_qubits;
            rep.extra["worst_slack"] = worst;
            rep.extra["violations"] = violations;
            rep.gates.push_back({"no-violations", violations == 0});
            return finish(std::move(rep), timer, out_path, format);
        }

        if (*amp_cmd) {
            auto strat = adversary::parse_strategy(amp_strategy, amp_n);
            if (!strat)
                throw std::invalid_argument("amplification needs a strategy");
            games::AmplificationReport ar =
                amp_mode == "exact"
                    ? games::amplification_report_exact(strat->descriptor(),
                                                        amp_n)
                    : games::amplification_report_mc(amp_n, 0.0, strat, trials,
                                                     seed);
            Report rep;
            rep.experiment = "game-amplification";
            rep.seed = seed;
            rep.params["n"] = amp_n;
            rep.params["strategy"] = strat->name();
            rep.params["mode"] = ar.mode;
            rep.params["m2"] = ar.m2;
            rep.extra["acc_m2"] = ar.acc_m2;
            rep.extra["acc_measured"] = ar.acc_measured;
            rep.extra["ratio"] = ar.ratio;
            rep.gates.push_back({"amplification-factor", ar.ok});
            return finish(std::move(rep), timer, out_path, format);
        }

        if (*jensen_cmd) {
            puzzle::SingleProverPair pair = make_jensen_pair(jpair, jn);
            games::JensenReport jr =
                games::jensen_report(jn, jk, pair, trials, seed);
            Report rep;
            rep.experiment = "game-jensen";
            rep.seed = seed;
            rep.params["n"] = jn;
            rep.params["k"] = jk;
            rep.params["pair"] = jpair;
            rep.params["trials"] = trials;
            rep.estimates.push_back({"single", jr.single});
            rep.estimates.push_back({"both", jr.both});
            rep.extra["slack"] = jr.slack;
            rep.gates.push_back({"jensen-squaring", jr.ok});
            if (jpair == "deterministic")
                rep.gates.push_back(
                    {"deterministic-equality",
                     jr.single.successes == jr.both.successes});
            return finish(std::move(rep), timer, out_path, format);
        }

        if (*bounds_cmd) {
            Report rep;
            rep.experiment = "bounds-" + lemma;
            rep.seed = seed;
            if (lemma == "locc") {
                auto [lo, hi] = parse_range(n_range);
                rep.params["n"] = n_range;
                rep.table.header = {"n", "raw", "vacuous"};
                for (int n = lo; n <= hi; ++n) {
                    games::LoccBound b = games::locc_bound(n);
                    rep.table.rows.push_back(
                        {std::to_string(n), fmt(b.raw),
                         b.vacuous ? "true" : "false"});
                }
            } else if (lemma == "amplification") {
                auto [lo, hi] = parse_range(m2_range);
                rep.params["m2"] = m2_range;
                rep.table.header = {"m2", "factor", "note"};
                for (int m2 = lo; m2 <= hi; ++m2) {
                    games::BoundSpec spec{
                        games::BoundSpec::Name::amplification, m2};
                    rep.table.rows.push_back(
                        {std::to_string(m2), fmt(spec.raw()), spec.note()});
                }
            } else {
                auto [lo, hi] = parse_range(k_range);
                rep.params["k"] = k_range;
                rep.table.header = {"k", "raw", "note"};
                for (int k = lo; k <= hi; ++k) {
                    games::BoundSpec spec{games::BoundSpec::Name::puzzle_2k,
                                          k};
                    rep.table.rows.push_back(
                        {std::to_string(k), fmt(spec.raw()), spec.note()});
                }
            }
            if (out_path.empty()) {
                // sweeps print to stdout; csv unless json was asked for
                std::cout << report::emit(
                    rep, app.count("--format") ? format : std::string("csv"));
                return 0;
            }
            return finish(std::move(rep), timer, out_path, format);
        }

        if (*hybrid_cmd) {
            games::HybridParams hp{hy_m2, hy_fail, 0};
            int n = hp.n();
            adversary::StrategyPtr strat;
            if (hy_strategy.empty()) {
                std::vector<int> kept;
                for (int i = 0; i < hy_m2; ++i) kept.push_back(i);
                strat = adversary::keep_subset_strategy(
                    kept, adversary::breidbart_strategy());
            } else {
                strat = adversary::parse_strategy(hy_strategy, n);
            }
            Report rep;
            rep.experiment = "hybrid";
            rep.seed = seed;
            rep.params["m2"] = hy_m2;
            rep.params["n"] = n;
            rep.params["strategy"] = strat->name();
            rep.params["which"] = hy_which;
            rep.params["trials"] = trials;

            auto estimate_hybrid = [&](games::Hybrid which) {
                return games::estimate_acceptance(
                    [&](Rng& r) {
                        return games::run_hybrid(which, hp, *strat, r);
                    },
                    trials, seed);
            };
            std::map<std::string, games::Estimate> ests;
            auto want = [&](const char* tag) {
                return hy_which == "all" || hy_which == tag;
            };
            if (want("0")) ests["hybrid0"] = estimate_hybrid(games::Hybrid::h0);
            if (want("1")) ests["hybrid1"] = estimate_hybrid(games::Hybrid::h1);
            if (want("2")) ests["hybrid2"] = estimate_hybrid(games::Hybrid::h2);
            if (want("3")) ests["hybrid3"] = estimate_hybrid(games::Hybrid::h3);
            for (auto& [name, est] : ests)
                rep.estimates.push_back({name, est});
            if (hy_which == "all") {
                const auto& h0 = ests["hybrid0"];
                const auto& h2 = ests["hybrid2"];
                const auto& h3 = ests["hybrid3"];
                double se02 =
                    std::sqrt(h0.se() * h0.se() + h2.se() * h2.se());
                rep.gates.push_back(
                    {"hybrid0-equals-hybrid2",
                     std::abs(h0.p_hat - h2.p_hat) <= 3 * se02});
                double se23 = std::sqrt(
                    h2.se() * h2.se() +
                    std::exp2(2.0 * hy_m2) * h3.se() * h3.se());
                rep.gates.push_back(
                    {"hybrid2-le-2^m2-hybrid3",
                     h2.p_hat <= std::exp2(hy_m2) * h3.p_hat + 3 * se23});
                games::LoccBound bound = games::locc_bound(n);
                rep.gates.push_back(
                    {"hybrid3-le-locc-bound",
                     h3.p_hat <= bound.raw + 3 * h3.se()});
                rep.extra["locc_bound"] = bound.raw;
            }
            return finish(std::move(rep), timer, out_path, format);
        }

        if (*ke_cmd) {
            std::optional<HoldSpec> hold;
            if (ke_depol > 0.0) hold = HoldSpec{0, ke_depol};
            games::Estimate agree =
                derived::ke_agreement(ke_n, ke_fail, hold, trials, seed);
            Report rep;
            rep.experiment = "ke";
            rep.seed = seed;
            rep.params["n"] = ke_n;
            rep.params["depolarize"] = ke_depol;
            rep.params["fail_prob"] = ke_fail;
            rep.params["trials"] = trials;
            rep.estimates.push_back({"agreement", agree});
            if (ke_depol == 0.0 && ke_fail == 0.0)
                rep.gates.push_back({"agreement-exact", agree.p_hat == 1.0});
            double bound = std::exp2(-ke_n);
            std::vector<std::pair<std::string, derived::Eve>> eves = {
                {"eve-zeros",
                 [ke_n](const Transcript&, Rng&) {
                     return std::string(static_cast<std::size_t>(ke_n), '0');
                 }},
                {"eve-theta-echo",
                 [](const Transcript& tau, Rng&) {
                     return tau.entries.at(1).bytes;
                 }},
                {"eve-random",
                 [ke_n](const Transcript&, Rng& rng) {
                     return rng.bits(ke_n);
                 }},
            };
            for (auto& [name, eve] : eves) {
                games::Estimate est = games::with_bound(
                    derived::ke_eve_eval(ke_n, eve, trials, seed + 1), bound);
                rep.gates.push_back(
                    {name + "-bounded",
                     est.p_hat <= bound + 3 * est.se() + 1e-9});
                rep.estimates.push_back({name, est});
            }
            return finish(std::move(rep), timer, out_path, format);
        }

        if (*sp_cmd) {
            Report rep;
            rep.experiment = "statepuzz";
            rep.seed = seed;
            rep.params["n"] = sp_n;
            rep.params["trials"] = trials;
            derived::ReductionReport honest =
                derived::statepuzz_reduction_report(sp_n, nullptr, trials,
                                                    seed);
            rep.estimates.push_back({"honest-fidelity", honest.fidelity});
            rep.gates.push_back(
                {"honest-fidelity-one", honest.fidelity.p_hat == 1.0});
            rep.gates.push_back(
                {"honest-composition-accepts",
                 honest.acceptance.p_hat == 1.0});
            double bound = std::exp2(-sp_n);
            std::vector<std::pair<std::string, derived::StatePuzzAttacker>>
                attackers = {
                    {"attacker-zeros",
                     [sp_n](const std::string&, Rng&) {
                         return qsim::new_register(sp_n);
                     }},
                    {"attacker-random-bb84",
                     [sp_n](const std::string&, Rng& rng) {
                         return qsim::prepare_bb84(
                             qsim::random_bb84(sp_n, rng));
                     }},
                };
            for (auto& [name, attacker] : attackers) {
                games::Estimate est = games::with_bound(
                    derived::statepuzz_attack_eval(sp_n, attacker, trials,
                                                   seed + 1),
                    bound);
                rep.gates.push_back(
                    {name + "-bounded",
                     est.p_hat <= bound + 3 * est.se() + 1e-9});
                rep.estimates.push_back({name, est});
            }
            return finish(std::move(rep), timer, out_path, format);
        }

        if (*verifier_cmd) {
            vcfg.protocol = v_po.protocol;
            vcfg.n = v_po.params().n;
            vcfg.k = v_po.k;
            vcfg.fail_prob = v_po.fail_prob;
            vcfg.hold_ms = v_po.hold_ms;
            vcfg.seed = seed;
            vcfg.out_path = out_path;
            vcfg.format = format;
            auto sessions = net::serve_verifier(vcfg);
            bool all_ok = true;
            for (std::size_t i = 0; i < sessions.size(); ++i) {
                const auto& s = sessions[i];
                std::cout << "session " << i << ": "
                          << (s.verdict.accepted ? "ACCEPT" : "REJECT") << " ("
                          << s.verdict.detail << ") "
                          << s.session_ms << " ms\n";
                all_ok = all_ok && s.verdict.accepted;
            }
            return all_ok ? 0 : 1;
        }

        if (*prover_cmd) {
            pcfg.protocol = p_po.protocol;
            pcfg.n = p_po.params().n;
            pcfg.k = p_po.k;
            pcfg.fail_prob = p_po.fail_prob;
            pcfg.depolarize = p_po.depolarize;
            pcfg.seed = seed;
            net::ProverOutcome out = net::run_prover(pcfg);
            std::cout << (out.accepted ? "ACCEPT" : "REJECT") << " ("
                      << out.verdict_detail << ")\n";
            return out.accepted ? 0 : 1;
        }

        if (*report_cmd) {
            std::ifstream in(rep_in);
            if (!in) throw std::runtime_error("cannot read " + rep_in);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            Report rep = report::parse_json(text);
            std::string emitted = report::emit(rep, format);
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                out << emitted;
            } else {
                std::cout << emitted;
            }
            return rep.all_pass() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
