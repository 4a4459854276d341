// Acceptance suite: runs every gate the artifact must clear, one line per
// criterion, nonzero exit on any failure. Criterion 10 drives the real CLI
// binary (path given as argv[1]) over loopback TCP.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "poqm/adversary.hpp"
#include "poqm/derived.hpp"
#include "poqm/games.hpp"
#include "poqm/protocols.hpp"
#include "poqm/report.hpp"

using namespace poqm;

namespace {

std::string cli_path;

struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<bool(std::string&)> run;
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

// --- C1 -------------------------------------------------------------------
bool c1_honest_completeness(std::string& detail) {
    struct Case {
        const char* name;
        ProtocolParams params;
        double limit_s;
    };
    std::vector<Case> cases = {
        {"bb84-it", {.n = 8}, 10.0},
        {"bb84-rsp", {.n = bb84::n_for_m2(1)}, 10.0},
        {"puzzle", {.n = 8, .k = 2}, 10.0},
    };
    bool ok = true;
    std::ostringstream out;
    for (const auto& c : cases) {
        auto t0 = std::chrono::steady_clock::now();
        auto proto = make_protocol(c.name, c.params);
        auto prover = proto->make_honest_prover();
        games::Estimate est = games::estimate_acceptance(
            [&](Rng& r) {
                return run_poqm(*proto, *prover, r.next_u64())
                    .verdict.accepted;
            },
            10000, 101);
        double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        bool case_ok = est.successes == 10000 && secs < c.limit_s;
        ok = ok && case_ok;
        out << c.name << "=" << est.successes << "/10000 (" << fmt(secs, 3)
            << "s) ";
    }
    detail = out.str();
    return ok;
}

// --- C2 -------------------------------------------------------------------
bool c2_locc_bound(std::string& detail) {
    bool ok = true;
    std::ostringstream out;
    const long trials = 100000;
    std::uint64_t seed = 200;
    for (int n : {8, 12, 16}) {
        games::LoccBound bound = games::locc_bound(n);
        for (const auto& entry : adversary::strategy_zoo()) {
            if (!entry.locc_capable) continue;
            auto strat = entry.make(n);
            auto play = strat->locc_play();
            games::Estimate est = games::estimate_acceptance(
                [&](Rng& r) { return games::locc_leakage_game(play, n, r); },
                trials, seed++);
            bool within = est.p_hat <= bound.raw + 3 * est.se();
            ok = ok && within;
            if (!within)
                out << "VIOLATION " << entry.name << " n=" << n << " p="
                    << fmt(est.p_hat) << " bound=" << fmt(bound.raw) << "; ";
            if (n == 8 && entry.name == "breidbart") {
                bool in_window = est.p_hat >= 0.2717 && est.p_hat <= 0.2917;
                ok = ok && in_window;
                out << "breidbart(8)=" << fmt(est.p_hat) << " ";
            }
            if (n == 8 && entry.name == "classical-comp") {
                bool in_window = est.p_hat >= 0.0901 && est.p_hat <= 0.1101;
                ok = ok && in_window;
                out << "classical(8)=" << fmt(est.p_hat) << " ";
            }
        }
    }
    out << "bounds(8,12,16)=" << fmt(games::locc_bound(8).raw) << ","
        << fmt(games::locc_bound(12).raw) << ","
        << fmt(games::locc_bound(16).raw);
    detail = out.str();
    return ok;
}

// --- C3 -------------------------------------------------------------------
bool c3_bonneau_zhandry(std::string& detail) {
    // Tight case first: p'(0) = p(0)/2 exactly.
    games::BzCircuit tight;
    tight.initial = qsim::prepare_bb84({1, "0", "1"});
    tight.gates.push_back({qsim::gate::h(), {0}});
    games::BzReport t = games::check_bz(tight, {0, {0}});
    bool ok = t.ok && std::abs(t.p_inserted[0] - 0.5) < 1e-12 &&
              std::abs(t.worst_slack) < 1e-12;

    Rng rng(300);
    int violations = 0;
    for (int c = 0; c < 100; ++c) {
        int n = 1 + static_cast<int>(rng.below(3));
        games::BzCircuit circuit;
        // random product-ish start, then random gates
        circuit.initial = qsim::prepare_bb84(qsim::random_bb84(n, rng));
        int depth = 1 + static_cast<int>(rng.below(5));
        for (int g = 0; g < depth; ++g) {
            if (n >= 2 && rng.bit()) {
                int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
                int b = (a + 1 + static_cast<int>(rng.below(
                                     static_cast<std::uint64_t>(n - 1)))) %
                        n;
                circuit.gates.push_back({qsim::gate::cnot(), {a, b}});
            } else {
                int q = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
                circuit.gates.push_back(
                    {qsim::gate::basis_rotation(rng.uniform() * M_PI), {q}});
                if (rng.bit()) circuit.gates.push_back({qsim::gate::t(), {q}});
            }
        }
        games::BzInsertion ins;
        ins.step = static_cast<int>(
            rng.below(static_cast<std::uint64_t>(circuit.gates.size() + 1)));
        for (int q = 0; q < n; ++q)
            if (rng.bit() || (q == n - 1 && ins.qubits.empty()))
                ins.qubits.push_back(q);
        if (!games::check_bz(circuit, ins).ok) ++violations;
    }
    ok = ok && violations == 0;
    detail = "tight-case slack=" + fmt(t.worst_slack) +
             ", randomized violations=" + std::to_string(violations) + "/100";
    return ok;
}

// --- C4 -------------------------------------------------------------------
bool c4_amplification(std::string& detail) {
    bool ok = true;
    int checked = 0;
    double ref_acc = 0, ref_meas = 0;
    for (int n = 1; n <= 4; ++n) {
        for (int m2 = 0; m2 <= std::min(n, 2); ++m2) {
            std::vector<int> kept;
            for (int i = 0; i < m2; ++i) kept.push_back(i);
            for (auto fb : {adversary::classical_basis_guess(0.0),
                            adversary::breidbart_strategy()}) {
                auto s = adversary::keep_subset_strategy(kept, fb);
                auto rep = games::amplification_report_exact(s->descriptor(), n);
                ok = ok && rep.ok;
                ++checked;
                if (n == 1 && m2 == 1) {
                    ref_acc = rep.acc_m2;
                    ref_meas = rep.acc_measured;
                }
            }
        }
    }
    ok = ok && std::abs(ref_acc - 1.0) < 1e-12 &&
         std::abs(ref_meas - 0.75) < 1e-12;
    detail = std::to_string(checked) +
             " exact cases, n=1/m2=1 gives (" + fmt(ref_acc) + ", " +
             fmt(ref_meas) + ")";
    return ok;
}

// --- C5 -------------------------------------------------------------------
bool c5_hybrid_chain(std::string& detail) {
    bool ok = true;
    std::ostringstream out;
    const long trials = 100000;
    for (int m2 : {1, 2}) {
        std::vector<int> kept;
        for (int i = 0; i < m2; ++i) kept.push_back(i);
        auto strat = adversary::keep_subset_strategy(
            kept, adversary::breidbart_strategy());
        games::HybridParams hp{m2, 0.0, 0};
        const int n = hp.n();
        auto est = [&](games::Hybrid which, std::uint64_t seed) {
            return games::estimate_acceptance(
                [&](Rng& r) { return games::run_hybrid(which, hp, *strat, r); },
                trials, seed);
        };
        games::Estimate h0 = est(games::Hybrid::h0, 500);
        games::Estimate h2 = est(games::Hybrid::h2, 500);
        games::Estimate h3 = est(games::Hybrid::h3, 501);
        double se02 = std::sqrt(h0.se() * h0.se() + h2.se() * h2.se());
        bool eq02 = std::abs(h0.p_hat - h2.p_hat) <= 3 * se02 + 1e-12;
        games::LoccBound bound = games::locc_bound(n);
        bool under = h3.p_hat <= bound.raw + 3 * h3.se();
        ok = ok && eq02 && under;
        out << "m2=" << m2 << ": h0=" << fmt(h0.p_hat) << " h2="
            << fmt(h2.p_hat) << " h3=" << fmt(h3.p_hat) << " bound("
            << n << ")=" << fmt(bound.raw) << "; ";
    }
    // Exact amplification link at small sizes (Hybrid 2 vs Hybrid 3).
    for (int n = 1; n <= 4; ++n)
        for (int m2 = 0; m2 <= std::min(n, 2); ++m2) {
            std::vector<int> kept;
            for (int i = 0; i < m2; ++i) kept.push_back(i);
            auto s = adversary::keep_subset_strategy(
                kept, adversary::breidbart_strategy());
            ok = ok && games::amplification_report_exact(s->descriptor(), n).ok;
        }
    out << "exact h2<=2^m2*h3 at n<=4";
    detail = out.str();
    return ok;
}

// --- C6 -------------------------------------------------------------------
puzzle::SingleProverPair jensen_pair(const std::string& name, int n) {
    puzzle::SingleProverPair pair;
    pair.m2 = 0;
    if (name == "deterministic" || name == "honest-info") {
        bool rerandomize = name == "honest-info";
        pair.p1 = [](const std::string& pk, qsim::BlockedState handed,
                     Rng& rng) {
            std::string bits;
            for (int q = 0; q < handed.qubits(); ++q)
                bits.push_back(handed.measure_angle(q, 0.0, rng) ? '1' : '0');
            return std::make_tuple(std::string{}, pk + "|" + bits,
                                   qsim::QReg::scalar());
        };
        pair.p2 = [rerandomize](const std::string& s, qsim::QReg&,
                                const puzzle::Challenge& ch, Rng& rng) {
            auto bar = s.find('|');
            puzzle::BlockLayout layout =
                puzzle::BlockLayout::parse(s.substr(0, bar));
            std::string out = s.substr(bar + 1);
            if (rerandomize)
                for (int i = 0; i < layout.n; ++i)
                    if (ch.ch[static_cast<std::size_t>(layout.block_of(i))] ==
                        '1')
                        out[static_cast<std::size_t>(i)] =
                            rng.bit() ? '1' : '0';
            return out;
        };
        return pair;
    }
    // uniform
    pair.p1 = [](const std::string&, qsim::BlockedState, Rng&) {
        return std::make_tuple(std::string{}, std::string{},
                               qsim::QReg::scalar());
    };
    pair.p2 = [n](const std::string&, qsim::QReg&, const puzzle::Challenge&,
                  Rng& rng) { return rng.bits(n); };
    return pair;
}

bool c6_jensen(std::string& detail) {
    bool ok = true;
    std::ostringstream out;
    const long trials = 100000;
    const int n = 4, k = 1;
    std::uint64_t seed = 600;
    for (const char* name : {"deterministic", "uniform", "honest-info"}) {
        games::JensenReport rep =
            games::jensen_report(n, k, jensen_pair(name, n), trials, seed++);
        ok = ok && rep.ok;
        if (std::string(name) == "deterministic") {
            bool equal = rep.single.successes == rep.both.successes;
            ok = ok && equal;
            out << "deterministic equal=" << (equal ? "yes" : "NO") << " ";
        }
        out << name << ": single=" << fmt(rep.single.p_hat) << " both="
            << fmt(rep.both.p_hat) << "; ";
    }
    detail = out.str();
    return ok;
}

// --- C7 -------------------------------------------------------------------
bool c7_statepuzz(std::string& detail) {
    const int n = 8;
    const double bound = std::exp2(-n);
    derived::ReductionReport honest =
        derived::statepuzz_reduction_report(n, nullptr, 10000, 700);
    bool ok = honest.fidelity.p_hat == 1.0 && honest.acceptance.p_hat == 1.0;

    std::vector<std::pair<std::string, derived::StatePuzzAttacker>> attackers =
        {
            {"zeros",
             [](const std::string&, Rng&) { return qsim::new_register(n); }},
            {"random-bb84",
             [](const std::string&, Rng& rng) {
                 return qsim::prepare_bb84(qsim::random_bb84(n, rng));
             }},
        };
    std::ostringstream out;
    out << "honest=1.0 ";
    for (auto& [name, attacker] : attackers) {
        games::Estimate est =
            derived::statepuzz_attack_eval(n, attacker, 30000, 701);
        bool under = est.p_hat <= bound + 3 * est.se() + 1e-9;
        ok = ok && under;
        out << name << "=" << fmt(est.p_hat) << " ";
    }
    out << "bound=" << fmt(bound);
    detail = out.str();
    return ok;
}

// --- C8 -------------------------------------------------------------------
bool c8_qccc_ke(std::string& detail) {
    const int n = 8;
    const double bound = std::exp2(-n);
    games::Estimate agree =
        derived::ke_agreement(n, 0.0, std::nullopt, 10000, 800);
    bool ok = agree.successes == 10000;

    std::ostringstream out;
    out << "agreement=" << agree.successes << "/10000 ";
    std::vector<std::pair<std::string, derived::Eve>> eves = {
        {"zeros",
         [](const Transcript&, Rng&) { return std::string(n, '0'); }},
        {"theta-echo",
         [](const Transcript& tau, Rng&) { return tau.entries.at(1).bytes; }},
        {"random", [](const Transcript&, Rng& rng) { return rng.bits(n); }},
    };
    for (auto& [name, eve] : eves) {
        games::Estimate est = derived::ke_eve_eval(n, eve, 30000, 801);
        bool under = est.p_hat <= bound + 3 * est.se() + 1e-9;
        ok = ok && under;
        out << "eve-" << name << "=" << fmt(est.p_hat) << " ";
    }
    games::Estimate noisy =
        derived::ke_agreement(n, 0.0, HoldSpec{0, 0.05}, 10000, 802);
    out << "agreement@depol0.05=" << fmt(noisy.p_hat)
        << " (no fixed target)";
    detail = out.str();
    return ok;
}

// --- C9 -------------------------------------------------------------------
bool c9_brute_force(std::string& detail) {
    const double target = std::cos(M_PI / 8) * std::cos(M_PI / 8);
    adversary::BruteForceResult best = adversary::brute_force_best(1, 64);
    bool ok = std::abs(best.value - target) <= 0.01 &&
              std::abs(best.angles.at(0) - M_PI / 8) <= M_PI / 64 + 1e-12;

    auto breidbart = adversary::breidbart_strategy();
    games::Estimate mc =
        games::bb84_soundness_estimate(1, 0.0, *breidbart, 100000, 900);
    ok = ok && mc.ci_low <= best.value && best.value <= mc.ci_high;
    detail = "oracle=" + fmt(best.value) + " at angle " +
             fmt(best.angles.at(0)) + ", mc=" + fmt(mc.p_hat) + " ci=[" +
             fmt(mc.ci_low) + "," + fmt(mc.ci_high) + "]";
    return ok;
}

// --- C10 ------------------------------------------------------------------
pid_t spawn(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    pid_t pid = fork();
    if (pid == 0) {
        execv(argv[0], argv.data());
        _exit(127);
    }
    return pid;
}

int wait_exit(pid_t pid) {
    int status = 0;
    waitpid(pid, &status, 0);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string wait_port(const std::string& path) {
    for (int i = 0; i < 1000; ++i) {
        std::ifstream f(path);
        std::string port;
        if (f >> port && !port.empty() && port != "0") return port;
        usleep(10000);
    }
    throw std::runtime_error("verifier never published a port");
}

bool c10_networked(std::string& detail) {
    if (cli_path.empty()) {
        detail = "CLI binary path not supplied";
        return false;
    }
    namespace fs = std::filesystem;
    auto one_run = [&](const std::string& tag, std::string& transcript,
                       double& session_ms, bool& accepted) {
        std::string dir = fs::temp_directory_path() /
                          ("poqm-acc-" + tag + "-" + std::to_string(getpid()));
        fs::create_directories(dir);
        std::string port_file = dir + "/port";
        std::string rep_file = dir + "/report.json";
        pid_t vpid = spawn({cli_path, "verifier", "--protocol", "bb84-it",
                            "--n", "8", "--hold-ms", "2000", "--seed", "77",
                            "--port-file", port_file, "--out", rep_file});
        std::string port = wait_port(port_file);
        pid_t ppid = spawn({cli_path, "prover", "--protocol", "bb84-it",
                            "--n", "8", "--seed", "78", "--port", port});
        int pexit = wait_exit(ppid);
        int vexit = wait_exit(vpid);
        std::ifstream rf(rep_file);
        std::string text((std::istreambuf_iterator<char>(rf)),
                         std::istreambuf_iterator<char>());
        report::Report rep = report::parse_json(text);
        transcript = rep.extra.at("transcript").get<std::string>();
        session_ms = rep.wall_ms;
        accepted = rep.all_pass() && pexit == 0 && vexit == 0;
        fs::remove_all(dir);
    };

    std::string t1, t2;
    double ms1 = 0, ms2 = 0;
    bool ok1 = false, ok2 = false;
    one_run("a", t1, ms1, ok1);
    one_run("b", t2, ms2, ok2);
    bool ok = ok1 && ok2 && ms1 >= 2000.0 && ms2 >= 2000.0 && t1 == t2 &&
              !t1.empty();
    detail = "accepted=" + std::string(ok1 && ok2 ? "yes" : "NO") +
             " session_ms=" + fmt(ms1, 5) + "/" + fmt(ms2, 5) +
             " transcripts_equal=" + (t1 == t2 ? "yes" : "NO");
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) cli_path = argv[1];

    std::vector<Criterion> criteria = {
        {1, "honest completeness (bb84-it, bb84-rsp, puzzle)", 30.0,
         c1_honest_completeness},
        {2, "LOCC leakage bound over the strategy zoo", 60.0, c2_locc_bound},
        {3, "measurement-insertion check (exact)", 30.0, c3_bonneau_zhandry},
        {4, "measured-adversary amplification (exact)", 10.0,
         c4_amplification},
        {5, "hybrid chain", 120.0, c5_hybrid_chain},
        {6, "jensen squaring", 60.0, c6_jensen},
        {7, "state puzzle", 30.0, c7_statepuzz},
        {8, "classical-channel key exchange", 30.0, c8_qccc_ke},
        {9, "brute-force oracle consistency", 60.0, c9_brute_force},
        {10, "networked verifier/prover session", 15.0, c10_networked},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        bool in_time = secs < c.limit_s;
        bool pass = ok && in_time;
        if (!pass) ++failures;
        std::cout << (pass ? "[PASS]" : "[FAIL]") << " C" << c.id << " "
                  << c.name << ": " << detail << " [" << fmt(secs, 3)
                  << "s / limit " << fmt(c.limit_s, 3) << "s]" << std::endl;
    }
    if (failures)
        std::cout << failures << " criterion(s) FAILED" << std::endl;
    else
        std::cout << "all criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
