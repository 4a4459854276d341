#pragma once

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "poqm/core.hpp"
#include "poqm/qsim.hpp"

namespace poqm::bb84 {

using json = nlohmann::ordered_json;

/// Register size used by the RSP-compiled protocol for a target memory
/// bound m2: ceil(9.1 * m2), computed in integer arithmetic.
inline int n_for_m2(int m2) {
    if (m2 < 1) throw std::invalid_argument("m2 must be >= 1");
    return (91 * m2 + 9) / 10;
}

/// Outcome of the ideal remote-state-preparation functionality: the
/// completeness condition realized with trace distance exactly zero, plus an
/// explicit fail knob. On pass the delivered register equals
/// prepare_bb84(desc) exactly; on fail the description never reaches the
/// verifier side (the state is delivered all the same, so a prover cannot
/// tell the branches apart).
struct RspOutcome {
    bool pass = true;
    std::optional<qsim::Bb84Description> desc;  // present iff pass
    qsim::Bb84Description delivered_desc;       // what the prover holds
    double fail_prob = 0.0;

    qsim::QReg delivered() const { return qsim::prepare_bb84(delivered_desc); }
};

/// One invocation of the ideal RSP functionality.
inline RspOutcome run_ideal_rsp(int n, double fail_prob, Rng& rng) {
    if (fail_prob < 0.0 || fail_prob > 1.0)
        throw std::invalid_argument("fail_prob must be in [0, 1]");
    RspOutcome out;
    out.fail_prob = fail_prob;
    out.pass = fail_prob == 0.0 || rng.uniform() >= fail_prob;
    out.delivered_desc = qsim::random_bb84(n, rng);
    if (out.pass) out.desc = out.delivered_desc;
    return out;
}

/// The verifier's private output v: (pass, x, theta) or fail (n only).
struct VerifierSecret {
    bool pass = true;
    qsim::Bb84Description desc;  // valid only when pass

    std::string to_string() const {
        json j;
        j["flag"] = pass ? "pass" : "fail";
        j["n"] = desc.n;
        if (pass) {
            j["x"] = desc.x;
            j["theta"] = desc.theta;
        }
        return j.dump();
    }

    static VerifierSecret parse(const std::string& s) {
        json j = json::parse(s);
        VerifierSecret vs;
        vs.pass = j.at("flag").get<std::string>() == "pass";
        vs.desc.n = j.at("n").get<int>();
        if (vs.pass) {
            vs.desc.x = j.at("x").get<std::string>();
            vs.desc.theta = j.at("theta").get<std::string>();
        }
        return vs;
    }

    static VerifierSecret from_rsp(const RspOutcome& rsp) {
        VerifierSecret vs;
        vs.pass = rsp.pass;
        vs.desc.n = rsp.delivered_desc.n;
        if (rsp.desc) vs.desc = *rsp.desc;
        return vs;
    }
};

/// Honest execution-phase prover: measure qubit i in the computational basis
/// if theta_i = 0, in the Hadamard basis if theta_i = 1; x' is the
/// concatenated outcomes in qubit order. Consumes the register.
inline std::string execute_prover(qsim::QReg reg, const std::string& theta,
                                  Rng& rng) {
    require_bitstring(theta, "theta");
    if (reg.n != static_cast<int>(theta.size()))
        throw std::invalid_argument("theta length does not match register");
    std::string out;
    out.reserve(theta.size());
    for (char t : theta) {
        auto [bit, rest] =
            qsim::measure_angle_remove(reg, 0, t == '1' ? M_PI / 4 : 0.0, rng);
        out.push_back(bit ? '1' : '0');
        reg = std::move(rest);
    }
    return out;
}

/// Verifier's final decision: accept iff the RSP flag is pass and x' = x.
inline Verdict execute_verifier(const VerifierSecret& vs,
                                const std::string& x_prime) {
    if (!vs.pass) return {false, "rsp flag fail"};
    if (x_prime.size() != vs.desc.x.size())
        return {false, "answer length mismatch"};
    if (x_prime != vs.desc.x) return {false, "x' != x"};
    return {true, "x' == x"};
}

/// Extractor of the extractable PoQM (ideal RSP): the honest prover's
/// execution message is the matching-basis measurement of the delivered
/// BB84 state, which is deterministic, so the verifier predicts it as x.
inline std::string extract(const VerifierSecret& vs, const Transcript& tau,
                           const std::string& theta_msg) {
    (void)tau;
    if (!vs.pass)
        throw std::runtime_error("extraction unavailable: rsp flag is fail");
    if (theta_msg != vs.desc.theta)
        throw std::invalid_argument("theta message does not match v");
    return vs.desc.x;
}

/// Initialization of the information-theoretic protocol, as one in-process
/// step: samples (x, theta), hands the BB84 register to the prover
/// out-of-band, and records only an envelope marker in the transcript.
inline InitOutcome it_init(int n, Rng& rng) {
    qsim::Bb84Description desc = qsim::random_bb84(n, rng);
    InitOutcome out;
    out.verifier_out = VerifierSecret{true, desc}.to_string();
    out.prover_state = "";
    out.prover_quantum = qsim::prepare_bb84(desc);
    out.transcript.entries.push_back(
        {Role::verifier, MsgKind::qenvelope, "bb84-envelope"});
    return out;
}

/// Ideal-RSP initialization: with probability fail_prob the flag is fail
/// (the verifier will reject in the execution phase); the register is
/// delivered either way so a prover cannot tell the branches apart.
inline std::pair<VerifierSecret, InitOutcome> ideal_rsp_init(int n,
                                                             double fail_prob,
                                                             Rng& rng) {
    RspOutcome rsp = run_ideal_rsp(n, fail_prob, rng);
    VerifierSecret vs = VerifierSecret::from_rsp(rsp);
    InitOutcome out;
    out.verifier_out = vs.to_string();
    out.prover_state = "";
    out.prover_quantum = rsp.delivered();
    out.transcript.entries.push_back(
        {Role::verifier, MsgKind::qenvelope, "bb84-envelope"});
    return {vs, out};
}

namespace detail {

class Bb84Verifier : public VerifierPart {
  public:
    Bb84Verifier(int n, double fail_prob) : n_(n), fail_prob_(fail_prob) {}

    std::string init_phase(Channel& ch, Rng& rng) override {
        RspOutcome rsp = run_ideal_rsp(n_, fail_prob_, rng);
        ch.send_qstate(rsp.delivered_desc);
        return VerifierSecret::from_rsp(rsp).to_string();
    }

    Verdict exec_phase(const std::string& v, Channel& ch, Rng& rng) override {
        VerifierSecret vs = VerifierSecret::parse(v);
        // On fail send a fresh uniform theta so the branches look identical
        // from the prover side, then reject regardless.
        ch.send(vs.pass ? vs.desc.theta : rng.bits(n_));
        std::string x_prime = ch.recv();
        return execute_verifier(vs, x_prime);
    }

  private:
    int n_;
    double fail_prob_;
};

class Bb84HonestProver : public ProverPart {
  public:
    explicit Bb84HonestProver(int n) : n_(n) {}

    int carried_qubits() const override { return n_; }

    ProverInit init_phase(Channel& ch, Rng& rng) override {
        (void)rng;
        qsim::Bb84Description desc = ch.recv_qstate();
        return {"", qsim::prepare_bb84(desc)};
    }

    void exec_phase(const std::string& state, qsim::QReg& memory, Channel& ch,
                    Rng& rng) override {
        (void)state;
        std::string theta = ch.recv();
        ch.send(execute_prover(std::move(memory), theta, rng));
        memory = qsim::QReg::scalar();
    }

  private:
    int n_;
};

}  // namespace detail

/// The information-theoretic BB84 PoQM: the verifier prepares the state
/// itself and hands it over a trusted quantum channel. m1 = n, m2 = 0.
class ItProtocol : public PoqmProtocol {
  public:
    explicit ItProtocol(ProtocolParams p) : params_(std::move(p)) {
        params_.fail_prob = 0.0;
    }

    std::string name() const override { return "bb84-it"; }
    const ProtocolParams& params() const override { return params_; }
    int m1() const override { return params_.n; }

    std::unique_ptr<VerifierPart> make_verifier() const override {
        return std::make_unique<detail::Bb84Verifier>(params_.n, 0.0);
    }
    std::unique_ptr<ProverPart> make_honest_prover() const override {
        return std::make_unique<detail::Bb84HonestProver>(params_.n);
    }

  private:
    ProtocolParams params_;
};

/// The RSP-compiled PoQM with the LWE-based RSP replaced by an ideal
/// functionality (delivery exact, explicit fail probability). The execution
/// phase is a single round, and the protocol is extractable with
/// extraction probability 1 when fail_prob = 0 and there is no hold noise.
class IdealRspProtocol : public PoqmProtocol {
  public:
    explicit IdealRspProtocol(ProtocolParams p) : params_(std::move(p)) {}

    static IdealRspProtocol for_m2(int m2, ProtocolParams base = {}) {
        base.n = n_for_m2(m2);
        return IdealRspProtocol(std::move(base));
    }

    std::string name() const override { return "bb84-rsp"; }
    const ProtocolParams& params() const override { return params_; }
    int m1() const override { return params_.n; }

    std::unique_ptr<VerifierPart> make_verifier() const override {
        return std::make_unique<detail::Bb84Verifier>(params_.n,
                                                      params_.fail_prob);
    }
    std::unique_ptr<ProverPart> make_honest_prover() const override {
        return std::make_unique<detail::Bb84HonestProver>(params_.n);
    }

  private:
    ProtocolParams params_;
};

}  // namespace poqm::bb84
