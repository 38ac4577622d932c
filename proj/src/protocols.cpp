#include "darkspace/protocols.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace darkspace {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Precomputed eigendecomposition so exp(i a G) costs two small products.
class HermitianExponential {
public:
    explicit HermitianExponential(const ComplexMatrix& g) : generator_(g) {
        if (hermiticity_error(g) > 1e-12 * std::max(1.0, g.norm())) {
            throw ValidationError("generator is not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (g + g.adjoint()));
        vectors_ = es.eigenvectors();
        values_ = es.eigenvalues();
    }

    ComplexMatrix operator()(double angle) const {
        const ComplexVector phases = (kI * angle * values_.cast<Complex>().array()).exp().matrix();
        return vectors_ * phases.asDiagonal() * vectors_.adjoint();
    }

    const ComplexMatrix& generator() const { return generator_; }

private:
    ComplexMatrix generator_;
    ComplexMatrix vectors_;
    Eigen::VectorXd values_;
};

double scalar_phase_error(const ComplexMatrix& m) {
    // distance of m from the nearest c * 1 with |c| = 1
    const Eigen::Index n = m.rows();
    const Complex c = m.trace() / double(n);
    if (std::abs(c) < 1e-300) return m.norm();
    const Complex unit = c / std::abs(c);
    return (m - unit * ComplexMatrix::Identity(n, n)).norm();
}

}  // namespace

// ---------------------------------------------------------------- angle paths

double AnglePath::value(double s) const {
    double v = offset;
    switch (family) {
        case AngleFamily::Constant:
            break;
        case AngleFamily::Linear:
        case AngleFamily::Fourier:
            v += kTwoPi * winding * s;
            break;
        case AngleFamily::Smoothstep:
            v += kTwoPi * winding * s * s * (3.0 - 2.0 * s);
            break;
    }
    if (family == AngleFamily::Fourier) {
        for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
            v += sin_coeffs[k] * std::sin(kTwoPi * double(k + 1) * s);
        }
        for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
            v += cos_coeffs[k] * (std::cos(kTwoPi * double(k + 1) * s) - 1.0);
        }
    }
    return v;
}

double AnglePath::derivative(double s) const {
    double d = 0.0;
    switch (family) {
        case AngleFamily::Constant:
            break;
        case AngleFamily::Linear:
        case AngleFamily::Fourier:
            d += kTwoPi * winding;
            break;
        case AngleFamily::Smoothstep:
            d += kTwoPi * winding * 6.0 * s * (1.0 - s);
            break;
    }
    if (family == AngleFamily::Fourier) {
        for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
            const double w = kTwoPi * double(k + 1);
            d += sin_coeffs[k] * w * std::cos(w * s);
        }
        for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
            const double w = kTwoPi * double(k + 1);
            d -= cos_coeffs[k] * w * std::sin(w * s);
        }
    }
    return d;
}

std::string to_string(AngleFamily family) {
    switch (family) {
        case AngleFamily::Constant: return "constant";
        case AngleFamily::Linear: return "linear";
        case AngleFamily::Smoothstep: return "smoothstep";
        case AngleFamily::Fourier: return "fourier";
    }
    return "unknown";
}

AngleFamily angle_family_from_string(const std::string& name) {
    if (name == "constant") return AngleFamily::Constant;
    if (name == "linear") return AngleFamily::Linear;
    if (name == "smoothstep") return AngleFamily::Smoothstep;
    if (name == "fourier") return AngleFamily::Fourier;
    throw ValidationError("unknown angle family '" + name + "'");
}

void PathSpec::validate() const {
    for (const AnglePath* a : {&theta, &phi}) {
        const double closure = a->value(1.0) - a->value(0.0) - kTwoPi * a->winding;
        if (std::abs(closure) > 1e-10) {
            throw ValidationError("PathSpec: angle path does not close modulo 2 pi");
        }
        if (a->family == AngleFamily::Constant && a->winding != 0) {
            throw ValidationError("PathSpec: constant angle with nonzero winding");
        }
    }
}

// ---------------------------------------------------------------- spin algebra

SpinOperators spin_operators(int two_j) {
    if (two_j < 1) throw ValidationError("spin_operators: two_j must be >= 1");
    const int n = two_j + 1;
    const double j = 0.5 * two_j;
    ComplexMatrix sz = ComplexMatrix::Zero(n, n);
    ComplexMatrix sp = ComplexMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double m = j - k;
        sz(k, k) = m;
        if (k > 0) {
            // <m+1| S_+ |m>
            sp(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
        }
    }
    const ComplexMatrix sm = sp.adjoint();
    return {0.5 * (sp + sm), Complex(0.0, -0.5) * (sp - sm), sz};
}

// ---------------------------------------------------------------- Protocol

Protocol::Protocol(ComplexMatrix l_rot, UnitaryPath u, std::optional<UnitaryPath> du,
                   double gamma_t, ProtocolDescriptor descriptor)
    : l_rot_(std::move(l_rot)),
      u_(std::move(u)),
      du_(std::move(du)),
      gamma_t_(gamma_t),
      descriptor_(std::move(descriptor)) {
    require_square(l_rot_, "Protocol L_rot");
    if (!(gamma_t_ > 0.0) || !std::isfinite(gamma_t_)) {
        throw ValidationError("Protocol: gammaT must be positive and finite");
    }
    if (!u_) throw ValidationError("Protocol: missing unitary path");
}

ComplexMatrix Protocol::unitary_derivative(double s) const {
    if (du_) return (*du_)(s);
    constexpr double h = 1e-6;
    const ComplexMatrix coarse = (u_(s + h) - u_(s - h)) / (2.0 * h);
    const ComplexMatrix fine = (u_(s + 0.5 * h) - u_(s - 0.5 * h)) / h;
    const ComplexMatrix richardson = (4.0 * fine - coarse) / 3.0;
    // The two estimates differ by O(h^2) truncation plus O(eps/h) roundoff.
    if ((coarse - fine).norm() > 1e-6 * std::max(1.0, richardson.norm())) {
        std::ostringstream msg;
        msg << "Protocol: finite-difference derivative failed the Richardson cross-check at s = "
            << s;
        throw NumericalError(msg.str());
    }
    return richardson;
}

Protocol Protocol::with_gamma_t(double gamma_t) const {
    Protocol copy = *this;
    if (!(gamma_t > 0.0)) throw ValidationError("Protocol: gammaT must be positive");
    copy.gamma_t_ = gamma_t;
    return copy;
}

void Protocol::validate_cycle(double tol) const {
    const Eigen::Index n = dim();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    for (int k = 0; k <= 64; ++k) {
        const double s = k / 64.0;
        const ComplexMatrix u = u_(s);
        if (u.rows() != n || u.cols() != n) {
            throw ValidationError("Protocol: U(s) has the wrong dimension");
        }
        if ((u.adjoint() * u - id).norm() > tol) {
            std::ostringstream msg;
            msg << "Protocol: U(s) is not unitary at s = " << s;
            throw ValidationError(msg.str());
        }
    }
    if (scalar_phase_error(u_(1.0) * u_(0.0).adjoint()) > tol) {
        throw ValidationError("Protocol: path is not cyclic (U(1) U(0)^+ is not a phase)");
    }
}

ComplexMatrix lab_jump(const Protocol& protocol, double s) {
    const ComplexMatrix u = protocol.unitary(s);
    return u.adjoint() * protocol.rotating_jump() * u;
}

ComplexMatrix spin32_jump() {
    const SpinOperators s = spin_operators(3);
    const ComplexMatrix id = ComplexMatrix::Identity(4, 4);
    return s.x * (s.z * s.z - 0.25 * id);
}

Protocol spin32_protocol(const PathSpec& path, double gamma_t) {
    path.validate();
    const SpinOperators s = spin_operators(3);
    const HermitianExponential ry(s.y);
    const ComplexMatrix sy = s.y;
    const Eigen::VectorXd mz = s.z.diagonal().real();

    auto rz = [mz](double phi) -> ComplexMatrix {
        return (kI * phi * mz.cast<Complex>().array()).exp().matrix().asDiagonal();
    };
    auto u = [=](double t) -> ComplexMatrix {
        return ry(path.theta.value(t)) * rz(path.phi.value(t));
    };
    const ComplexMatrix szm = s.z;
    auto du = [=](double t) -> ComplexMatrix {
        const ComplexMatrix a = ry(path.theta.value(t));
        const ComplexMatrix b = rz(path.phi.value(t));
        return kI * path.theta.derivative(t) * sy * a * b +
               a * (kI * path.phi.derivative(t) * szm) * b;
    };

    ProtocolDescriptor desc{"spin32",
                            {{"theta_offset", path.theta.offset},
                             {"theta_winding", double(path.theta.winding)},
                             {"phi_offset", path.phi.offset},
                             {"phi_winding", double(path.phi.winding)},
                             {"gammaT", gamma_t}}};
    Protocol p(spin32_jump(), u, Protocol::UnitaryPath(du), gamma_t, std::move(desc));
    p.validate_cycle();
    return p;
}

Protocol custom_protocol(const std::vector<ComplexMatrix>& generators,
                         const std::vector<AnglePath>& angles, const ComplexMatrix& l_rot,
                         double gamma_t, DerivativeMode mode) {
    if (generators.empty() || generators.size() != angles.size()) {
        throw ValidationError("custom_protocol: need one angle path per generator");
    }
    require_square(l_rot, "custom_protocol L_rot");
    std::vector<HermitianExponential> factors;
    for (const auto& g : generators) {
        require_square(g, "custom_protocol generator");
        if (g.rows() != l_rot.rows()) {
            throw ValidationError("custom_protocol: generator dimension mismatch");
        }
        factors.emplace_back(g);
    }
    const Eigen::Index n = l_rot.rows();

    auto u = [=](double s) -> ComplexMatrix {
        ComplexMatrix out = ComplexMatrix::Identity(n, n);
        for (std::size_t k = 0; k < factors.size(); ++k) out = out * factors[k](angles[k].value(s));
        return out;
    };
    std::optional<Protocol::UnitaryPath> du;
    if (mode == DerivativeMode::Analytic) {
        du = [=](double s) -> ComplexMatrix {
            std::vector<ComplexMatrix> e;
            for (std::size_t k = 0; k < factors.size(); ++k) e.push_back(factors[k](angles[k].value(s)));
            ComplexMatrix total = ComplexMatrix::Zero(n, n);
            for (std::size_t k = 0; k < factors.size(); ++k) {
                ComplexMatrix term = ComplexMatrix::Identity(n, n);
                for (std::size_t j = 0; j < factors.size(); ++j) {
                    if (j == k) term = term * (kI * angles[k].derivative(s) * factors[k].generator());
                    term = term * e[j];
                }
                total += term;
            }
            return total;
        };
    }

    ProtocolDescriptor desc{"custom", {{"generators", double(generators.size())}, {"gammaT", gamma_t}}};
    Protocol p(l_rot, u, du, gamma_t, std::move(desc));
    p.validate_cycle();
    return p;
}

LindbladGenerator lab_generator(const Protocol& protocol, double tau) {
    LindbladGenerator gen;
    gen.jumps.push_back(lab_jump(protocol, tau / protocol.gamma_t()));
    return gen;
}

LindbladGenerator rotating_generator(const Protocol& protocol, double tau) {
    const double s = tau / protocol.gamma_t();
    const ComplexMatrix u = protocol.unitary(s);
    const ComplexMatrix h = kI * protocol.unitary_derivative(s) * u.adjoint();
    LindbladGenerator gen;
    gen.hamiltonian = 0.5 * (h + h.adjoint());
    gen.hamiltonian_prefactor = 1.0 / protocol.gamma_t();
    gen.jumps.push_back(protocol.rotating_jump());
    return gen;
}

}  // namespace darkspace
