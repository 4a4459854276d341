#pragma once

#include <json.hpp>

#include <functional>
#include <memory>
#include <string>
#include <tuple>
#include <utility>

#include "poqm/core.hpp"
#include "poqm/qsim.hpp"

namespace poqm::puzzle {

using json = nlohmann::ordered_json;

/// Partition of [n] into k contiguous blocks of size floor(n/k) or
/// ceil(n/k); the first (n mod k) blocks take the larger size.
struct BlockLayout {
    int n = 0;
    int k = 1;

    int block_size(int j) const {
        int base = n / k;
        return j < n % k ? base + 1 : base;
    }
    int block_start(int j) const {
        int base = n / k, extra = n % k;
        return j * base + std::min(j, extra);
    }
    int block_of(int qubit) const {
        for (int j = 0; j < k; ++j)
            if (qubit < block_start(j) + block_size(j)) return j;
        throw std::out_of_range("qubit outside layout");
    }

    std::string to_string() const {
        json j;
        j["n"] = n;
        j["k"] = k;
        return j.dump();
    }
    static BlockLayout parse(const std::string& s) {
        json j = json::parse(s);
        return {j.at("n").get<int>(), j.at("k").get<int>()};
    }
};

struct ToySecret {
    qsim::Bb84Description desc;
    BlockLayout layout;
};

struct PuzzleKeys {
    std::string pk;  // the public block layout
    ToySecret sk;
};

struct PuzzleInstance {
    std::string y;   // toy: empty
    qsim::QReg reg;
    BlockLayout layout;
};

struct Challenge {
    std::string ch;  // k bits; ch_j selects the measurement basis of block j
};

/// Toy KeyGen with a trusted quantum handoff: samples (x, theta), publishes
/// the layout, and also returns the BB84 register that is delivered to
/// Obligate out of band.
inline std::pair<PuzzleKeys, qsim::QReg> toy_keygen(int n, int k, Rng& rng) {
    if (k < 1 || k > n) throw std::invalid_argument("need 1 <= k <= n");
    BlockLayout layout{n, k};
    qsim::Bb84Description desc = qsim::random_bb84(n, rng);
    PuzzleKeys keys{layout.to_string(), {desc, layout}};
    return {std::move(keys), qsim::prepare_bb84(desc)};
}

inline PuzzleInstance toy_obligate(const std::string& pk, qsim::QReg handed) {
    BlockLayout layout = BlockLayout::parse(pk);
    if (handed.n != layout.n)
        throw std::invalid_argument("handed register does not match layout");
    return {"", std::move(handed), layout};
}

/// Toy Solve: measure every qubit in block j in basis ch_j
/// (0 = computational, 1 = Hadamard); ans is the outcomes in qubit order.
inline std::string toy_solve(PuzzleInstance inst, const Challenge& ch,
                             Rng& rng) {
    require_bitstring(ch.ch, "ch");
    if (static_cast<int>(ch.ch.size()) != inst.layout.k)
        throw std::invalid_argument("challenge length != k");
    std::string ans;
    ans.reserve(static_cast<std::size_t>(inst.layout.n));
    qsim::QReg reg = std::move(inst.reg);
    for (int i = 0; i < inst.layout.n; ++i) {
        char basis = ch.ch[static_cast<std::size_t>(inst.layout.block_of(i))];
        auto [bit, rest] = qsim::measure_angle_remove(
            reg, 0, basis == '1' ? M_PI / 4 : 0.0, rng);
        ans.push_back(bit ? '1' : '0');
        reg = std::move(rest);
    }
    return ans;
}

/// Toy Ver: accept iff ans agrees with x at every position whose prepared
/// basis matches the challenged basis of its block. Positions measured in
/// the wrong basis are unchecked.
inline bool toy_ver(const ToySecret& sk, const std::string& y,
                    const Challenge& ch, const std::string& ans) {
    (void)y;
    if (static_cast<int>(ans.size()) != sk.layout.n) return false;
    if (static_cast<int>(ch.ch.size()) != sk.layout.k) return false;
    for (int i = 0; i < sk.layout.n; ++i) {
        char challenged = ch.ch[static_cast<std::size_t>(sk.layout.block_of(i))];
        if (sk.desc.theta[static_cast<std::size_t>(i)] == challenged &&
            ans[static_cast<std::size_t>(i)] != sk.desc.x[static_cast<std::size_t>(i)])
            return false;
    }
    return true;
}

/**
 * The four-algorithm puzzle interface consumed by the generic compiler.
 * The secret key is type-erased as a serialized string so the compiled
 * verifier can carry it inside v. Instantiations built on a trusted quantum
 * handoff (the toy) report it via trusted_handoff(); keygen then also
 * yields the description of the register that reaches Obligate out of band.
 */
class OneOf2kPuzzle {
  public:
    virtual ~OneOf2kPuzzle() = default;

    virtual std::string name() const = 0;
    virtual int n() const = 0;  // qubits of the obligated register (m1)
    virtual int k() const = 0;
    virtual bool trusted_handoff() const { return false; }

    struct Keys {
        std::string pk;
        std::string sk;
        std::optional<qsim::Bb84Description> handoff;
    };
    virtual Keys keygen(Rng& rng) const = 0;
    virtual std::pair<std::string, qsim::QReg> obligate(
        const std::string& pk,
        const std::optional<qsim::Bb84Description>& handed, Rng& rng) const = 0;
    virtual std::string solve(const std::string& pk, const std::string& y,
                              qsim::QReg rho, const Challenge& ch,
                              Rng& rng) const = 0;
    virtual bool ver(const std::string& sk, const std::string& y,
                     const Challenge& ch, const std::string& ans) const = 0;
};

/// The toy instantiation behind the OneOf2kPuzzle interface.
class ToyPuzzle : public OneOf2kPuzzle {
  public:
    ToyPuzzle(int n, int k) : n_(n), k_(k) {
        if (k < 1 || k > n) throw std::invalid_argument("need 1 <= k <= n");
    }

    std::string name() const override { return "puzzle"; }
    int n() const override { return n_; }
    int k() const override { return k_; }
    bool trusted_handoff() const override { return true; }

    Keys keygen(Rng& rng) const override {
        auto [keys, reg] = toy_keygen(n_, k_, rng);
        (void)reg;  // handed over as its description
        json sk;
        sk["x"] = keys.sk.desc.x;
        sk["theta"] = keys.sk.desc.theta;
        sk["n"] = n_;
        sk["k"] = k_;
        return {keys.pk, sk.dump(), keys.sk.desc};
    }

    std::pair<std::string, qsim::QReg> obligate(
        const std::string& pk,
        const std::optional<qsim::Bb84Description>& handed,
        Rng&) const override {
        if (!handed)
            throw ProtocolError("toy puzzle needs the trusted handoff");
        PuzzleInstance inst = toy_obligate(pk, qsim::prepare_bb84(*handed));
        return {inst.y, std::move(inst.reg)};
    }

    std::string solve(const std::string& pk, const std::string& y,
                      qsim::QReg rho, const Challenge& ch,
                      Rng& rng) const override {
        PuzzleInstance inst{y, std::move(rho), BlockLayout::parse(pk)};
        return toy_solve(std::move(inst), ch, rng);
    }

    bool ver(const std::string& sk, const std::string& y, const Challenge& ch,
             const std::string& ans) const override {
        json j = json::parse(sk);
        ToySecret secret{{j.at("n").get<int>(), j.at("x").get<std::string>(),
                          j.at("theta").get<std::string>()},
                         {j.at("n").get<int>(), j.at("k").get<int>()}};
        return toy_ver(secret, y, ch, ans);
    }

  private:
    int n_, k_;
};

namespace detail {

class CompiledVerifier : public VerifierPart {
  public:
    explicit CompiledVerifier(std::shared_ptr<const OneOf2kPuzzle> puzzle)
        : puzzle_(std::move(puzzle)) {}

    std::string init_phase(Channel& ch, Rng& rng) override {
        OneOf2kPuzzle::Keys keys = puzzle_->keygen(rng);
        ch.send(keys.pk);
        if (keys.handoff) ch.send_qstate(*keys.handoff);
        std::string y = ch.recv();
        json v;
        v["sk"] = keys.sk;
        v["y"] = y;
        return v.dump();
    }

    Verdict exec_phase(const std::string& v, Channel& ch, Rng& rng) override {
        json j = json::parse(v);
        Challenge chal{rng.bits(puzzle_->k())};
        ch.send(chal.ch);
        std::string ans = ch.recv();
        bool ok = puzzle_->ver(j.at("sk").get<std::string>(),
                               j.at("y").get<std::string>(), chal, ans);
        return {ok, ok ? "ver accepted" : "ver rejected"};
    }

  private:
    std::shared_ptr<const OneOf2kPuzzle> puzzle_;
};

class CompiledProver : public ProverPart {
  public:
    explicit CompiledProver(std::shared_ptr<const OneOf2kPuzzle> puzzle)
        : puzzle_(std::move(puzzle)) {}

    int carried_qubits() const override { return puzzle_->n(); }

    ProverInit init_phase(Channel& ch, Rng& rng) override {
        std::string pk = ch.recv();
        std::optional<qsim::Bb84Description> handed;
        if (puzzle_->trusted_handoff()) handed = ch.recv_qstate();
        auto [y, reg] = puzzle_->obligate(pk, handed, rng);
        ch.send(y);
        json st;
        st["pk"] = pk;
        st["y"] = y;
        return {st.dump(), std::move(reg)};
    }

    void exec_phase(const std::string& state, qsim::QReg& memory, Channel& ch,
                    Rng& rng) override {
        json st = json::parse(state);
        Challenge chal{ch.recv()};
        std::string ans =
            puzzle_->solve(st.at("pk").get<std::string>(),
                           st.at("y").get<std::string>(), std::move(memory),
                           chal, rng);
        memory = qsim::QReg::scalar();
        ch.send(ans);
    }

  private:
    std::shared_ptr<const OneOf2kPuzzle> puzzle_;
};

class CompiledPuzzleProtocol : public PoqmProtocol {
  public:
    CompiledPuzzleProtocol(std::shared_ptr<const OneOf2kPuzzle> puzzle,
                           ProtocolParams base)
        : puzzle_(std::move(puzzle)), params_(std::move(base)) {
        params_.n = puzzle_->n();
        params_.k = puzzle_->k();
    }

    std::string name() const override { return puzzle_->name(); }
    const ProtocolParams& params() const override { return params_; }
    int m1() const override { return puzzle_->n(); }

    std::unique_ptr<VerifierPart> make_verifier() const override {
        return std::make_unique<CompiledVerifier>(puzzle_);
    }
    std::unique_ptr<ProverPart> make_honest_prover() const override {
        return std::make_unique<CompiledProver>(puzzle_);
    }

  private:
    std::shared_ptr<const OneOf2kPuzzle> puzzle_;
    ProtocolParams params_;
};

}  // namespace detail

/// The generic 4-round compiler: init = {pk ->, <- y}, exec = {ch ->, <- ans},
/// verdict = Ver(sk, y, ch, ans); m1 is the puzzle's register size.
inline std::unique_ptr<PoqmProtocol> compile_puzzle_to_poqm(
    std::shared_ptr<const OneOf2kPuzzle> puzzle, ProtocolParams base = {}) {
    return std::make_unique<detail::CompiledPuzzleProtocol>(std::move(puzzle),
                                                            std::move(base));
}

/// Compiled toy puzzle, the registry's "puzzle" protocol.
inline std::unique_ptr<PoqmProtocol> compiled_toy_puzzle(ProtocolParams p) {
    auto toy = std::make_shared<ToyPuzzle>(p.n, p.k);
    return compile_puzzle_to_poqm(std::move(toy), std::move(p));
}

/// Compiled-protocol adversary with m2 = 0: obligates honestly, measures the
/// whole register computationally at the phase boundary, and answers the
/// stored bits whatever the challenge says.
class MeasuredToyProver : public ProverPart {
  public:
    int carried_qubits() const override { return 0; }
    bool is_adversary() const override { return true; }

    ProverInit init_phase(Channel& ch, Rng& rng) override {
        std::string pk = ch.recv();
        qsim::Bb84Description desc = ch.recv_qstate();
        PuzzleInstance inst = toy_obligate(pk, qsim::prepare_bb84(desc));
        ch.send(inst.y);
        qsim::BlockedState st = qsim::BlockedState::from_bb84(desc);
        std::string bits;
        for (int q = 0; q < st.qubits(); ++q)
            bits.push_back(st.measure_angle(q, 0.0, rng) ? '1' : '0');
        return {bits, qsim::QReg::scalar()};
    }

    void exec_phase(const std::string& state, qsim::QReg&, Channel& ch,
                    Rng&) override {
        ch.recv();       // challenge does not change the stored answer
        ch.send(state);
    }
};

// ---------------------------------------------------------------------------
// The three-party (A, B, C) security game.

struct AbcSplitOut {
    std::string y;
    qsim::QReg b_reg;
    std::string b_cls;
    qsim::QReg c_reg;
    std::string c_cls;
};

/// A receives pk and the handed register, outputs y plus a bipartite split:
/// a register and a classical string for each of B and C. There is no other
/// way to pass information downstream.
using AbcAFn = std::function<AbcSplitOut(const std::string& pk,
                                         qsim::BlockedState handed, Rng& rng)>;

class AbcSolver {
  public:
    virtual ~AbcSolver() = default;
    virtual std::string answer(qsim::QReg reg, const std::string& cls,
                               const Challenge& ch, Rng& rng) const = 0;
};

/**
 * One round of the (A, B, C) game: keygen, A splits, a single uniform
 * challenge goes to both B and C, and the challenger accepts iff both
 * answers verify. B and C must be distinct objects; there is no B<->C
 * channel (sharing one instance is the only way to smuggle state, so it is
 * rejected as a harness error). Neither sk nor theta is visible to any of
 * A, B, C before the answers are committed.
 *
 * Substream layout (keygen=0, A=1, ch=2, B=3, C=4) matches
 * run_single_prover_game so that reductions can be compared trial by trial.
 */
inline bool run_abc_game(int n, int k, const AbcAFn& a, const AbcSolver& b,
                         const AbcSolver& c, Rng& rng) {
    if (&b == &c)
        throw HarnessError(
            "B and C must be distinct instances: the game has no B<->C "
            "channel");
    Rng rk = rng.child(0), ra = rng.child(1), rch = rng.child(2),
        rb = rng.child(3), rc = rng.child(4);
    auto [keys, reg] = toy_keygen(n, k, rk);
    (void)reg;
    AbcSplitOut split =
        a(keys.pk, qsim::BlockedState::from_bb84(keys.sk.desc), ra);
    Challenge ch{rch.bits(k)};
    std::string ans_b = b.answer(std::move(split.b_reg), split.b_cls, ch, rb);
    std::string ans_c = c.answer(std::move(split.c_reg), split.c_cls, ch, rc);
    return toy_ver(keys.sk, split.y, ch, ans_b) &&
           toy_ver(keys.sk, split.y, ch, ans_c);
}

/// A single-prover pair (P1*, P2*) against the compiled protocol's game.
/// P1* sees pk and the handed register and outputs (y, s, rho) with rho of
/// exactly m2 qubits; P2* answers the challenge from (s, rho).
struct SingleProverPair {
    int m2 = 0;
    std::function<std::tuple<std::string, std::string, qsim::QReg>(
        const std::string& pk, qsim::BlockedState handed, Rng& rng)>
        p1;
    std::function<std::string(const std::string& s, qsim::QReg& rho,
                              const Challenge& ch, Rng& rng)>
        p2;
};

/// One round of the single-prover game; substreams match run_abc_game.
inline bool run_single_prover_game(int n, int k, const SingleProverPair& pair,
                                   Rng& rng) {
    Rng rk = rng.child(0), rp1 = rng.child(1), rch = rng.child(2),
        rp2 = rng.child(3);
    auto [keys, reg] = toy_keygen(n, k, rk);
    (void)reg;
    auto [y, s, rho] =
        pair.p1(keys.pk, qsim::BlockedState::from_bb84(keys.sk.desc), rp1);
    if (rho.n != pair.m2)
        throw HarnessError("single prover carried " + std::to_string(rho.n) +
                           " qubits, declared " + std::to_string(pair.m2));
    Challenge ch{rch.bits(k)};
    std::string ans = pair.p2(s, rho, ch, rp2);
    return toy_ver(keys.sk, y, ch, ans);
}

struct AbcFromPair {
    AbcAFn a;
    std::shared_ptr<AbcSolver> b;
    std::shared_ptr<AbcSolver> c;
};

namespace detail {

class PairSolver : public AbcSolver {
  public:
    explicit PairSolver(const SingleProverPair& pair) : pair_(pair) {}

    std::string answer(qsim::QReg reg, const std::string& cls,
                       const Challenge& ch, Rng& rng) const override {
        (void)reg;  // the reduction broadcast is classical only
        qsim::QReg none = qsim::QReg::scalar();
        return pair_.p2(cls, none, ch, rng);
    }

  private:
    SingleProverPair pair_;
};

}  // namespace detail

/// The Thm-4.1-style reduction: from a classical-output single prover,
/// build (A, B, C) where A broadcasts s' to both solvers and each runs P2*
/// independently. Rejects pairs that declare or produce quantum output.
inline AbcFromPair pair_from_single(const SingleProverPair& pair) {
    if (pair.m2 != 0)
        throw std::invalid_argument(
            "pair_from_single needs a classical-only P1* (m2 = 0)");
    AbcFromPair out;
    out.a = [pair](const std::string& pk, qsim::BlockedState handed,
                   Rng& rng) {
        auto [y, s, rho] = pair.p1(pk, std::move(handed), rng);
        if (rho.n != 0)
            throw std::invalid_argument(
                "pair_from_single: P1* produced quantum output");
        AbcSplitOut split;
        split.y = std::move(y);
        split.b_cls = s;
        split.c_cls = s;
        split.b_reg = qsim::QReg::scalar();
        split.c_reg = qsim::QReg::scalar();
        return split;
    };
    out.b = std::make_shared<detail::PairSolver>(pair);
    out.c = std::make_shared<detail::PairSolver>(pair);
    return out;
}

}  // namespace poqm::puzzle
