#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "poqm/rng.hpp"
#include "poqm/util.hpp"

namespace poqm::qsim {

using cd = std::complex<double>;

inline constexpr int kMaxQubits = 24;
inline constexpr double kNormTol = 1e-9;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/**
 * Conventions used everywhere in this library:
 *
 *  - A register of n qubits is a dense amplitude vector of length 2^n.
 *    Qubit 0 is the most significant bit of the basis index, so the basis
 *    state |b_0 b_1 ... b_{n-1}> sits at index sum_i b_i * 2^(n-1-i).
 *  - Measurement angles: angle 0 is the computational basis, pi/4 the
 *    Hadamard basis, pi/8 the Breidbart basis. The basis at angle a is
 *    { cos(a)|0> + sin(a)|1>,  -sin(a)|0> + cos(a)|1> }.
 *  - All randomness comes from an explicit Rng parameter.
 */
struct QReg {
    int n = 0;                  // qubit count; 0 = empty register (amps = [1])
    std::vector<cd> amps;

    static QReg scalar() { return QReg{0, {cd(1.0, 0.0)}}; }
    std::size_t dim() const { return amps.size(); }
};

/// The classical description (x, theta) of the BB84 product state
/// tensor_i H^{theta_i} |x_i>.
struct Bb84Description {
    int n = 0;
    std::string x;
    std::string theta;

    bool valid() const {
        return n >= 1 && n <= kMaxQubits &&
               static_cast<int>(x.size()) == n &&
               static_cast<int>(theta.size()) == n && is_bitstring(x) &&
               is_bitstring(theta);
    }
};

inline Bb84Description random_bb84(int n, Rng& rng) {
    return Bb84Description{n, rng.bits(n), rng.bits(n)};
}

/// Square complex matrix of power-of-two dimension, row major.
struct Unitary {
    int dim = 0;
    std::vector<cd> a;

    cd& at(int r, int c) { return a[static_cast<std::size_t>(r) * dim + c]; }
    const cd& at(int r, int c) const {
        return a[static_cast<std::size_t>(r) * dim + c];
    }

    static Unitary identity(int dim) {
        Unitary u{dim, std::vector<cd>(static_cast<std::size_t>(dim) * dim)};
        for (int i = 0; i < dim; ++i) u.at(i, i) = 1.0;
        return u;
    }

    double unitarity_defect() const {
        double worst = 0.0;
        for (int r = 0; r < dim; ++r) {
            for (int c = 0; c < dim; ++c) {
                cd dot = 0.0;
                for (int k = 0; k < dim; ++k)
                    dot += at(r, k) * std::conj(at(c, k));
                if (r == c) dot -= 1.0;
                worst = std::max(worst, std::abs(dot));
            }
        }
        return worst;
    }
    bool is_unitary(double tol = kNormTol) const {
        return unitarity_defect() <= tol;
    }
};

namespace gate {
inline Unitary h() {
    return Unitary{2, {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2}};
}
inline Unitary x() { return Unitary{2, {0, 1, 1, 0}}; }
inline Unitary y() { return Unitary{2, {0, cd(0, -1), cd(0, 1), 0}}; }
inline Unitary z() { return Unitary{2, {1, 0, 0, -1}}; }
inline Unitary s() { return Unitary{2, {1, 0, 0, cd(0, 1)}}; }
inline Unitary t() {
    return Unitary{2, {1, 0, 0, std::polar(1.0, M_PI / 4)}};
}
inline Unitary cnot() {
    return Unitary{4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0}};
}
/// Rotation mapping the computational basis onto the angle-a basis.
inline Unitary basis_rotation(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return Unitary{2, {c, s, -s, c}};
}
}  // namespace gate

inline double norm_sq(const QReg& reg) {
    double t = 0.0;
    for (const cd& a : reg.amps) t += std::norm(a);
    return t;
}

/// |0...0> on n qubits. 1 <= n <= 24.
inline QReg new_register(int n) {
    if (n < 1 || n > kMaxQubits)
        throw CapacityError("register size must be in [1, 24], got " +
                            std::to_string(n));
    QReg reg{n, std::vector<cd>(std::size_t{1} << n)};
    reg.amps[0] = 1.0;
    return reg;
}

/// Product state tensor_i H^{theta_i} |x_i>.
inline QReg prepare_bb84(const Bb84Description& d) {
    if (!d.valid()) throw std::invalid_argument("invalid BB84 description");
    QReg reg = new_register(d.n);
    // Build iteratively: qubit i contributes a factor on bit position n-1-i.
    std::size_t dim = 1;
    reg.amps[0] = 1.0;
    for (int i = 0; i < d.n; ++i) {
        cd a0, a1;  // amplitudes of |0> and |1> for qubit i
        if (d.theta[static_cast<std::size_t>(i)] == '0') {
            a0 = d.x[static_cast<std::size_t>(i)] == '0' ? 1.0 : 0.0;
            a1 = d.x[static_cast<std::size_t>(i)] == '0' ? 0.0 : 1.0;
        } else {
            a0 = kInvSqrt2;
            a1 = d.x[static_cast<std::size_t>(i)] == '0' ? kInvSqrt2
                                                         : -kInvSqrt2;
        }
        for (std::size_t j = dim; j-- > 0;) {
            cd v = reg.amps[j];
            reg.amps[2 * j] = v * a0;
            reg.amps[2 * j + 1] = v * a1;
        }
        dim *= 2;
    }
    return reg;
}

namespace detail {
inline void check_qubit(const QReg& reg, int i) {
    if (i < 0 || i >= reg.n)
        throw std::out_of_range("qubit index " + std::to_string(i) +
                                " out of range for " + std::to_string(reg.n) +
                                "-qubit register");
}

// Shared collapse kernel for angle measurements. If `remove` the measured
// qubit is dropped from the register, otherwise it is left in the
// post-measurement basis state.
inline std::pair<int, QReg> measure_angle_impl(const QReg& reg, int i,
                                               double angle, Rng& rng,
                                               bool remove) {
    check_qubit(reg, i);
    const double c = std::cos(angle), s = std::sin(angle);
    const std::size_t stride = std::size_t{1} << (reg.n - 1 - i);
    const std::size_t dim = reg.dim();

    double p0 = 0.0, p1 = 0.0;
    for (std::size_t base = 0; base < dim; ++base) {
        if (base & stride) continue;
        cd lo = reg.amps[base], hi = reg.amps[base | stride];
        p0 += std::norm(c * lo + s * hi);
        p1 += std::norm(-s * lo + c * hi);
    }
    double total = p0 + p1;
    int bit = (rng.uniform() * total < p0) ? 0 : 1;
    double psel = bit == 0 ? p0 : p1;
    if (psel <= 0.0) {  // numerically impossible branch; force the other
        bit = 1 - bit;
        psel = bit == 0 ? p0 : p1;
    }
    const double inv = 1.0 / std::sqrt(psel);
    const double u0 = bit == 0 ? c : -s;
    const double u1 = bit == 0 ? s : c;

    QReg out;
    if (remove) {
        out.n = reg.n - 1;
        out.amps.assign(dim / 2, cd{});
        std::size_t w = 0;
        for (std::size_t base = 0; base < dim; ++base) {
            if (base & stride) continue;
            out.amps[w++] =
                (u0 * reg.amps[base] + u1 * reg.amps[base | stride]) * inv;
        }
    } else {
        out.n = reg.n;
        out.amps.assign(dim, cd{});
        for (std::size_t base = 0; base < dim; ++base) {
            if (base & stride) continue;
            cd proj =
                (u0 * reg.amps[base] + u1 * reg.amps[base | stride]) * inv;
            out.amps[base] = proj * u0;
            out.amps[base | stride] = proj * u1;
        }
    }
    return {bit, std::move(out)};
}
}  // namespace detail

/// Projective measurement of qubit i in the angle-a basis. Returns the
/// outcome bit and the renormalized collapsed register (qubit kept).
inline std::pair<int, QReg> measure_angle(const QReg& reg, int i, double angle,
                                          Rng& rng) {
    return detail::measure_angle_impl(reg, i, angle, rng, false);
}

/// Same Born sampling as measure_angle but the measured qubit is removed
/// from the register (it is in a product basis state after collapse).
inline std::pair<int, QReg> measure_angle_remove(const QReg& reg, int i,
                                                 double angle, Rng& rng) {
    return detail::measure_angle_impl(reg, i, angle, rng, true);
}

namespace detail {
inline void check_subset(const QReg& reg, std::span<const int> subset) {
    std::vector<int> seen(static_cast<std::size_t>(reg.n), 0);
    for (int q : subset) {
        check_qubit(reg, q);
        if (seen[static_cast<std::size_t>(q)]++)
            throw std::invalid_argument("duplicate qubit in subset");
    }
}
}  // namespace detail

/// Computational measurement of a qubit subset. Outcome bits are sampled
/// jointly per the Born rule; the measured qubits are removed and the
/// residual register keeps the remaining qubits in their original order.
inline std::pair<std::string, QReg> measure_subset_computational(
    const QReg& reg, std::span<const int> subset, Rng& rng) {
    detail::check_subset(reg, subset);
    if (subset.empty()) return {std::string{}, reg};

    const std::size_t dim = reg.dim();
    // Sample a full computational outcome; its restriction to the subset is
    // distributed per the subset marginal.
    double total = norm_sq(reg);
    double u = rng.uniform() * total;
    std::size_t chosen = 0;
    bool found = false;
    std::size_t last_nonzero = 0;
    double cum = 0.0;
    for (std::size_t idx = 0; idx < dim; ++idx) {
        double p = std::norm(reg.amps[idx]);
        if (p > 0.0) last_nonzero = idx;
        cum += p;
        if (!found && u < cum) {
            chosen = idx;
            found = true;
        }
    }
    if (!found) chosen = last_nonzero;  // float-rounding fallback

    std::string bits(subset.size(), '0');
    std::size_t pattern_mask = 0, pattern_bits = 0;
    for (std::size_t j = 0; j < subset.size(); ++j) {
        std::size_t bitpos = std::size_t{1} << (reg.n - 1 - subset[j]);
        pattern_mask |= bitpos;
        if (chosen & bitpos) {
            bits[j] = '1';
            pattern_bits |= bitpos;
        }
    }

    // Collapse onto the chosen pattern and compact the remaining qubits.
    int rest_n = reg.n - static_cast<int>(subset.size());
    QReg out;
    out.n = rest_n;
    out.amps.assign(std::size_t{1} << rest_n, cd{});
    std::vector<std::size_t> rest_strides;
    for (int q = 0; q < reg.n; ++q) {
        std::size_t bitpos = std::size_t{1} << (reg.n - 1 - q);
        if (!(pattern_mask & bitpos)) rest_strides.push_back(bitpos);
    }
    double psel = 0.0;
    for (std::size_t idx = 0; idx < dim; ++idx) {
        if ((idx & pattern_mask) != pattern_bits) continue;
        psel += std::norm(reg.amps[idx]);
    }
    const double inv = 1.0 / std::sqrt(psel);
    const std::size_t rest_dim = out.amps.size();
    for (std::size_t r = 0; r < rest_dim; ++r) {
        std::size_t idx = pattern_bits;
        for (std::size_t b = 0; b < rest_strides.size(); ++b)
            if (r & (std::size_t{1} << (rest_strides.size() - 1 - b)))
                idx |= rest_strides[b];
        out.amps[r] = reg.amps[idx] * inv;
    }
    return {bits, std::move(out)};
}

/// Exact projection of a qubit subset onto fixed computational outcomes.
/// Returns the branch probability and the residual register (subset
/// removed). No sampling; used by the exact game evaluators.
inline std::pair<double, QReg> project_computational(const QReg& reg,
                                                     std::span<const int> subset,
                                                     const std::string& bits) {
    detail::check_subset(reg, subset);
    if (bits.size() != subset.size())
        throw std::invalid_argument("projection bits/subset size mismatch");
    std::size_t pattern_mask = 0, pattern_bits = 0;
    for (std::size_t j = 0; j < subset.size(); ++j) {
        std::size_t bitpos = std::size_t{1} << (reg.n - 1 - subset[j]);
        pattern_mask |= bitpos;
        if (bits[j] == '1') pattern_bits |= bitpos;
    }
    double psel = 0.0;
    for (std::size_t idx = 0; idx < reg.dim(); ++idx)
        if ((idx & pattern_mask) == pattern_bits)
            psel += std::norm(reg.amps[idx]);

    int rest_n = reg.n - static_cast<int>(subset.size());
    QReg out;
    out.n = rest_n;
    out.amps.assign(std::size_t{1} << rest_n, cd{});
    if (psel <= 0.0) return {0.0, std::move(out)};

    std::vector<std::size_t> rest_strides;
    for (int q = 0; q < reg.n; ++q) {
        std::size_t bitpos = std::size_t{1} << (reg.n - 1 - q);
        if (!(pattern_mask & bitpos)) rest_strides.push_back(bitpos);
    }
    const double inv = 1.0 / std::sqrt(psel);
    for (std::size_t r = 0; r < out.amps.size(); ++r) {
        std::size_t idx = pattern_bits;
        for (std::size_t b = 0; b < rest_strides.size(); ++b)
            if (r & (std::size_t{1} << (rest_strides.size() - 1 - b)))
                idx |= rest_strides[b];
        out.amps[r] = reg.amps[idx] * inv;
    }
    return {psel, std::move(out)};
}

/// Projective variant of the above: the measured qubits stay in the
/// register, collapsed onto `bits`. Used for mid-circuit measurement
/// branch enumeration.
inline std::pair<double, QReg> project_computational_keep(
    const QReg& reg, std::span<const int> subset, const std::string& bits) {
    detail::check_subset(reg, subset);
    if (bits.size() != subset.size())
        throw std::invalid_argument("projection bits/subset size mismatch");
    std::size_t pattern_mask = 0, pattern_bits = 0;
    for (std::size_t j = 0; j < subset.size(); ++j) {
        std::size_t bitpos = std::size_t{1} << (reg.n - 1 - subset[j]);
        pattern_mask |= bitpos;
        if (bits[j] == '1') pattern_bits |= bitpos;
    }
    double psel = 0.0;
    for (std::size_t idx = 0; idx < reg.dim(); ++idx)
        if ((idx & pattern_mask) == pattern_bits)
            psel += std::norm(reg.amps[idx]);
    QReg out;
    out.n = reg.n;
    out.amps.assign(reg.dim(), cd{});
    if (psel <= 0.0) return {0.0, std::move(out)};
    const double inv = 1.0 / std::sqrt(psel);
    for (std::size_t idx = 0; idx < reg.dim(); ++idx)
        if ((idx & pattern_mask) == pattern_bits)
            out.amps[idx] = reg.amps[idx] * inv;
    return {psel, std::move(out)};
}

/// Apply a 2^t x 2^t unitary to t target qubits (identity elsewhere).
inline QReg apply_unitary(const QReg& reg, const Unitary& u,
                          std::span<const int> targets) {
    detail::check_subset(reg, targets);
    const int t = static_cast<int>(targets.size());
    if (u.dim != (1 << t))
        throw std::invalid_argument("matrix dimension does not match target count");
    if (!u.is_unitary())
        throw std::invalid_argument("matrix is not unitary within 1e-9");

    std::vector<std::size_t> strides(targets.size());
    std::size_t tmask = 0;
    for (int j = 0; j < t; ++j) {
        strides[static_cast<std::size_t>(j)] =
            std::size_t{1} << (reg.n - 1 - targets[static_cast<std::size_t>(j)]);
        tmask |= strides[static_cast<std::size_t>(j)];
    }

    QReg out = reg;
    std::vector<cd> sub(static_cast<std::size_t>(u.dim));
    for (std::size_t base = 0; base < reg.dim(); ++base) {
        if (base & tmask) continue;
        for (int r = 0; r < u.dim; ++r) {
            std::size_t idx = base;
            for (int j = 0; j < t; ++j)
                if (r & (1 << (t - 1 - j))) idx |= strides[static_cast<std::size_t>(j)];
            sub[static_cast<std::size_t>(r)] = reg.amps[idx];
        }
        for (int r = 0; r < u.dim; ++r) {
            cd acc = 0.0;
            for (int c = 0; c < u.dim; ++c)
                acc += u.at(r, c) * sub[static_cast<std::size_t>(c)];
            std::size_t idx = base;
            for (int j = 0; j < t; ++j)
                if (r & (1 << (t - 1 - j))) idx |= strides[static_cast<std::size_t>(j)];
            out.amps[idx] = acc;
        }
    }
    return out;
}

/// Hold-noise channel in trajectory form: with probability p apply a
/// uniformly random Pauli from {I, X, Y, Z} to qubit i, else do nothing.
/// Mixtures are recovered by Monte-Carlo averaging over trials.
inline QReg depolarize(const QReg& reg, int i, double p, Rng& rng) {
    detail::check_qubit(reg, i);
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("depolarize probability outside [0, 1]");
    if (rng.uniform() >= p) return reg;
    const int which = static_cast<int>(rng.below(4));
    const int targets[1] = {i};
    switch (which) {
        case 0: return reg;  // I
        case 1: return apply_unitary(reg, gate::x(), targets);
        case 2: return apply_unitary(reg, gate::y(), targets);
        default: return apply_unitary(reg, gate::z(), targets);
    }
}

/// |<psi_target | reg>|^2 against the BB84 state described by `target`.
inline double fidelity(const QReg& reg, const Bb84Description& target) {
    if (!target.valid()) throw std::invalid_argument("invalid BB84 description");
    if (reg.n != target.n)
        throw std::invalid_argument("fidelity dimension mismatch");
    // Target amplitudes computed on the fly (product form).
    cd inner = 0.0;
    for (std::size_t idx = 0; idx < reg.dim(); ++idx) {
        double t = 1.0;
        for (int q = 0; q < reg.n && t != 0.0; ++q) {
            int bit = static_cast<int>(idx >> (reg.n - 1 - q)) & 1;
            if (target.theta[static_cast<std::size_t>(q)] == '0') {
                if (bit != target.x[static_cast<std::size_t>(q)] - '0') t = 0.0;
            } else {
                t *= kInvSqrt2;
                if (bit == 1 && target.x[static_cast<std::size_t>(q)] == '1')
                    t = -t;
            }
        }
        if (t != 0.0) inner += t * reg.amps[idx];
    }
    return std::norm(inner);
}

/// Tensor product; `a`'s qubits come first (most significant).
inline QReg tensor(const QReg& a, const QReg& b) {
    if (a.n + b.n > kMaxQubits)
        throw CapacityError("tensor product exceeds 24 qubits");
    QReg out;
    out.n = a.n + b.n;
    out.amps.resize(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j)
            out.amps[i * b.dim() + j] = a.amps[i] * b.amps[j];
    return out;
}

inline double state_distance(const QReg& a, const QReg& b) {
    if (a.n != b.n) throw std::invalid_argument("state distance dimension mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        worst = std::max(worst, std::abs(a.amps[i] - b.amps[i]));
    return worst;
}

/**
 * A register tracked as a product of independent blocks. Semantically
 * identical to the dense tensor of its blocks; operations that stay inside a
 * block cost only that block's dimension, so per-qubit protocols run in
 * O(n) instead of O(2^n) per step. Blocks merge automatically when an
 * operation spans them. Qubit ids are stable (they never re-index as other
 * qubits are measured out).
 */
class BlockedState {
  public:
    static BlockedState from_bb84(const Bb84Description& d) {
        if (!d.valid()) throw std::invalid_argument("invalid BB84 description");
        BlockedState st;
        st.total_ = d.n;
        for (int i = 0; i < d.n; ++i) {
            Bb84Description one{1, d.x.substr(static_cast<std::size_t>(i), 1),
                                d.theta.substr(static_cast<std::size_t>(i), 1)};
            st.blocks_.push_back(Block{prepare_bb84(one), {i}});
        }
        return st;
    }

    static BlockedState from_register(QReg reg) {
        BlockedState st;
        st.total_ = reg.n;
        std::vector<int> ids(static_cast<std::size_t>(reg.n));
        for (int i = 0; i < reg.n; ++i) ids[static_cast<std::size_t>(i)] = i;
        st.blocks_.push_back(Block{std::move(reg), std::move(ids)});
        return st;
    }

    int qubits() const { return total_; }

    int remaining() const {
        int c = 0;
        for (const auto& b : blocks_) c += b.reg.n;
        return c;
    }

    bool holds(int qubit) const {
        for (const auto& b : blocks_)
            for (int q : b.qubits)
                if (q == qubit) return true;
        return false;
    }

    /// Measure one qubit at the given angle; the qubit leaves the state.
    int measure_angle(int qubit, double angle, Rng& rng) {
        auto [bi, off] = locate(qubit);
        Block& b = blocks_[bi];
        auto [bit, rest] = measure_angle_remove(b.reg, off, angle, rng);
        b.reg = std::move(rest);
        b.qubits.erase(b.qubits.begin() + off);
        if (b.qubits.empty()) blocks_.erase(blocks_.begin() + static_cast<long>(bi));
        return bit;
    }

    std::string measure_computational(std::span<const int> qubits, Rng& rng) {
        std::string out;
        out.reserve(qubits.size());
        for (int q : qubits) out.push_back(measure_angle(q, 0.0, rng) ? '1' : '0');
        return out;
    }

    void apply_unitary(const Unitary& u, std::span<const int> qubits) {
        if (qubits.empty()) return;
        std::size_t bi = locate(qubits[0]).first;
        for (int q : qubits) bi = merge(bi, locate(q).first);
        Block& b = blocks_[bi];
        std::vector<int> offsets;
        offsets.reserve(qubits.size());
        for (int q : qubits) {
            auto it = std::find(b.qubits.begin(), b.qubits.end(), q);
            offsets.push_back(static_cast<int>(it - b.qubits.begin()));
        }
        b.reg = qsim::apply_unitary(b.reg, u, offsets);
    }

    /// Remove the listed qubits as one dense register, in the listed order.
    /// They must form whole blocks (no entanglement with what stays), with
    /// each multi-qubit block requested contiguously in its own order.
    QReg extract(std::span<const int> qubits) {
        QReg out = QReg::scalar();
        std::size_t i = 0;
        while (i < qubits.size()) {
            auto [bi, off] = locate(qubits[i]);
            const Block& b = blocks_[bi];
            if (off != 0 || i + b.qubits.size() > qubits.size())
                throw HarnessError("cannot extract an entangled sub-register");
            for (std::size_t j = 0; j < b.qubits.size(); ++j)
                if (b.qubits[j] != qubits[i + j])
                    throw HarnessError("cannot extract an entangled sub-register");
            out = out.n == 0 ? b.reg : tensor(out, b.reg);
            i += b.qubits.size();
            blocks_.erase(blocks_.begin() + static_cast<long>(bi));
        }
        return out;
    }

    /// Dense tensor of everything still held, ordered by qubit id.
    QReg to_register() {
        std::vector<int> ids;
        for (const auto& b : blocks_)
            for (int q : b.qubits) ids.push_back(q);
        std::sort(ids.begin(), ids.end());
        if (ids.empty()) return QReg::scalar();
        while (blocks_.size() > 1) merge(0, 1);
        Block& b = blocks_[0];
        // permute into ascending qubit id via adjacent swaps
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto it = std::find(b.qubits.begin(), b.qubits.end(), ids[i]);
            std::size_t j = static_cast<std::size_t>(it - b.qubits.begin());
            if (j != i) swap_adjacent_chain(b, j, i);
        }
        return b.reg;
    }

  private:
    struct Block {
        QReg reg;
        std::vector<int> qubits;  // qubit ids, in register order
    };

    std::pair<std::size_t, int> locate(int qubit) const {
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            const auto& b = blocks_[i];
            for (std::size_t j = 0; j < b.qubits.size(); ++j)
                if (b.qubits[j] == qubit) return {i, static_cast<int>(j)};
        }
        throw std::out_of_range("qubit " + std::to_string(qubit) +
                                " is no longer held");
    }

    std::size_t merge(std::size_t a, std::size_t b) {
        if (a == b) return a;
        if (a > b) std::swap(a, b);
        blocks_[a].reg = tensor(blocks_[a].reg, blocks_[b].reg);
        blocks_[a].qubits.insert(blocks_[a].qubits.end(),
                                 blocks_[b].qubits.begin(),
                                 blocks_[b].qubits.end());
        blocks_.erase(blocks_.begin() + static_cast<long>(b));
        return a;
    }

    static void swap_adjacent_chain(Block& b, std::size_t from, std::size_t to) {
        static const Unitary kSwap{
            4, {1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1}};
        while (from > to) {
            int offs[2] = {static_cast<int>(from - 1), static_cast<int>(from)};
            b.reg = qsim::apply_unitary(b.reg, kSwap, offs);
            std::swap(b.qubits[from - 1], b.qubits[from]);
            --from;
        }
        while (from < to) {
            int offs[2] = {static_cast<int>(from), static_cast<int>(from + 1)};
            b.reg = qsim::apply_unitary(b.reg, kSwap, offs);
            std::swap(b.qubits[from], b.qubits[from + 1]);
            ++from;
        }
    }

    int total_ = 0;
    std::vector<Block> blocks_;
};

}  // namespace poqm::qsim
