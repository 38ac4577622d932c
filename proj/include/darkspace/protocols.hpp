#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "darkspace/lindblad.hpp"
#include "darkspace/linalg.hpp"

namespace darkspace {

/// Built-in families for a control angle alpha(s), s in [0, 1]. Every family
/// satisfies alpha(0) = offset and alpha(1) = offset + 2 pi winding.
enum class AngleFamily { Constant, Linear, Smoothstep, Fourier };

struct AnglePath {
    AngleFamily family = AngleFamily::Constant;
    double offset = 0.0;
    int winding = 0;
    /// Fourier only: alpha += sum_k sin_coeffs[k] sin(2 pi (k+1) s)
    ///                     + cos_coeffs[k] (cos(2 pi (k+1) s) - 1)
    std::vector<double> sin_coeffs;
    std::vector<double> cos_coeffs;

    double value(double s) const;
    double derivative(double s) const;

    static AnglePath constant(double offset) { return {AngleFamily::Constant, offset, 0, {}, {}}; }
    static AnglePath linear(int winding, double offset = 0.0) {
        return {AngleFamily::Linear, offset, winding, {}, {}};
    }
    static AnglePath smoothstep(int winding, double offset = 0.0) {
        return {AngleFamily::Smoothstep, offset, winding, {}, {}};
    }
};

std::string to_string(AngleFamily family);
AngleFamily angle_family_from_string(const std::string& name);

/// (theta(s), phi(s)) for the spin rotation U = e^{i theta S_y} e^{i phi S_z}.
struct PathSpec {
    AnglePath theta;
    AnglePath phi;

    /// Throws ValidationError unless both angles close modulo 2 pi.
    void validate() const;
    std::pair<int, int> winding() const { return {theta.winding, phi.winding}; }
};

struct SpinOperators {
    ComplexMatrix x, y, z;
};

/// Spin-j matrices (dimension two_j + 1) in the S_z eigenbasis ordered
/// m = j, j-1, ..., -j.
SpinOperators spin_operators(int two_j);

struct ProtocolDescriptor {
    std::string name;
    std::vector<std::pair<std::string, double>> parameters;
};

/// A cyclic control: L_t = U(s)^+ L_rot U(s) with s = t / T.
class Protocol {
public:
    using UnitaryPath = std::function<ComplexMatrix(double)>;

    /// `du` may be empty, in which case the phase derivative is taken by
    /// central finite differences with a Richardson cross-check.
    Protocol(ComplexMatrix l_rot, UnitaryPath u, std::optional<UnitaryPath> du, double gamma_t,
             ProtocolDescriptor descriptor);

    Eigen::Index dim() const { return l_rot_.rows(); }
    const ComplexMatrix& rotating_jump() const { return l_rot_; }
    double gamma_t() const { return gamma_t_; }
    const ProtocolDescriptor& descriptor() const { return descriptor_; }
    bool has_analytic_derivative() const { return du_.has_value(); }

    ComplexMatrix unitary(double s) const { return u_(s); }
    ComplexMatrix unitary_derivative(double s) const;

    /// Copy with a different period parameter.
    Protocol with_gamma_t(double gamma_t) const;

    /// Throws ValidationError unless U is unitary at 64 sampled phases and
    /// U(1) U(0)^+ is a global phase.
    void validate_cycle(double tol = 1e-9) const;

private:
    ComplexMatrix l_rot_;
    UnitaryPath u_;
    std::optional<UnitaryPath> du_;
    double gamma_t_;
    ProtocolDescriptor descriptor_;
};

/// L_rot = S_x (S_z^2 - 1/4) for spin 3/2, U = e^{i theta S_y} e^{i phi S_z}.
Protocol spin32_protocol(const PathSpec& path, double gamma_t);

/// The rotating-frame jump operator of the spin-3/2 example.
ComplexMatrix spin32_jump();

/// U(s)^+ L_rot U(s).
ComplexMatrix lab_jump(const Protocol& protocol, double s);

enum class DerivativeMode { FiniteDifference, Analytic };

/// U(s) = prod_k exp(i alpha_k(s) G_k), first generator leftmost.
Protocol custom_protocol(const std::vector<ComplexMatrix>& generators,
                         const std::vector<AnglePath>& angles, const ComplexMatrix& l_rot,
                         double gamma_t, DerivativeMode mode = DerivativeMode::FiniteDifference);

/// Lab-frame generator at dimensionless time tau: jump L_{tau / gamma T}.
LindbladGenerator lab_generator(const Protocol& protocol, double tau);

/// Rotating-frame generator: H(s) with prefactor 1 / gamma T, jump L_rot.
LindbladGenerator rotating_generator(const Protocol& protocol, double tau);

}  // namespace darkspace
