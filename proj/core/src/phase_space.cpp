#include "timeless/phase_space.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "timeless/error.hpp"

namespace timeless {

void require_phase_point(const PhaseSpacePoint& z, int dof) {
  if (z.size() != 2 * dof) {
    fail(ErrorCode::DimensionMismatch, "phase-space point has length " +
                                           std::to_string(z.size()) + ", expected " +
                                           std::to_string(2 * dof));
  }
  if (!z.allFinite()) fail(ErrorCode::NumericalDomain, "phase-space point is not finite");
}

SymplecticForm::SymplecticForm(int dof) : epsilon(RealMatrix::Zero(2 * dof, 2 * dof)) {
  if (dof < 1) fail(ErrorCode::InvalidParameter, "symplectic form needs dof >= 1");
  epsilon.topRightCorner(dof, dof).setIdentity();
  epsilon.bottomLeftCorner(dof, dof) = -RealMatrix::Identity(dof, dof);
}

namespace {

RealVector checked_gradient(const HamiltonianField& f, const PhaseSpacePoint& z) {
  RealVector g = f.gradient(z);
  if (g.size() != z.size()) {
    fail(ErrorCode::DimensionMismatch, "gradient of " + f.name + " has the wrong length");
  }
  if (!g.allFinite()) {
    fail(ErrorCode::NumericalDomain, "gradient of " + f.name + " is not finite");
  }
  return g;
}

// grad(a)^T epsilon grad(b) without materializing epsilon.
double symplectic_product(const RealVector& ga, const RealVector& gb) {
  const Eigen::Index k = ga.size() / 2;
  return ga.head(k).dot(gb.tail(k)) - ga.tail(k).dot(gb.head(k));
}

}  // namespace

double poisson_bracket(const HamiltonianField& a, const HamiltonianField& b,
                       const PhaseSpacePoint& z) {
  require_phase_point(z, a.dof);
  return symplectic_product(checked_gradient(a, z), checked_gradient(b, z));
}

double tilde_apply(const HamiltonianField& h, const HamiltonianField& f,
                   const PhaseSpacePoint& z) {
  return poisson_bracket(f, h, z);
}

RealVector hamiltonian_vector_field(const HamiltonianField& h, const PhaseSpacePoint& z) {
  require_phase_point(z, h.dof);
  const RealVector g = checked_gradient(h, z);
  const Eigen::Index k = h.dof;
  RealVector out(2 * k);
  out.head(k) = g.tail(k);
  out.tail(k) = -g.head(k);
  return out;
}

RealVector numerical_gradient(const ScalarFn& f, const PhaseSpacePoint& z, double step) {
  RealVector g(z.size());
  PhaseSpacePoint probe = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    probe(i) = z(i) + step;
    const double up = f(probe);
    probe(i) = z(i) - step;
    const double down = f(probe);
    probe(i) = z(i);
    g(i) = (up - down) / (2.0 * step);
  }
  return g;
}

RealVector numerical_gradient(const std::function<double(const PhaseSpacePoint&, double)>& f,
                              const PhaseSpacePoint& z, double t, double step) {
  return numerical_gradient([&](const PhaseSpacePoint& x) { return f(x, t); }, z, step);
}

HamiltonianField free_particle(double mass, int dof) {
  if (!(mass > 0.0)) fail(ErrorCode::InvalidParameter, "mass must be positive");
  HamiltonianField h;
  h.name = "free_particle(" + std::to_string(mass) + ")";
  h.dof = dof;
  h.evaluate = [mass, dof](const PhaseSpacePoint& z) {
    return z.tail(dof).squaredNorm() / (2.0 * mass);
  };
  h.gradient = [mass, dof](const PhaseSpacePoint& z) {
    RealVector g = RealVector::Zero(2 * dof);
    g.tail(dof) = z.tail(dof) / mass;
    return g;
  };
  h.kinetic_gradient = [mass](const RealVector& p) -> RealVector { return p / mass; };
  h.potential_gradient = [](const RealVector& q) -> RealVector {
    return RealVector::Zero(q.size());
  };
  return h;
}

HamiltonianField harmonic_oscillator(double mass, double omega, int dof) {
  if (!(mass > 0.0)) fail(ErrorCode::InvalidParameter, "mass must be positive");
  if (!(omega > 0.0)) fail(ErrorCode::InvalidParameter, "frequency must be positive");
  const double stiffness = mass * omega * omega;
  HamiltonianField h;
  h.name = "harmonic(" + std::to_string(mass) + "," + std::to_string(omega) + ")";
  h.dof = dof;
  h.evaluate = [mass, stiffness, dof](const PhaseSpacePoint& z) {
    return z.tail(dof).squaredNorm() / (2.0 * mass) + 0.5 * stiffness * z.head(dof).squaredNorm();
  };
  h.gradient = [mass, stiffness, dof](const PhaseSpacePoint& z) {
    RealVector g(2 * dof);
    g.head(dof) = stiffness * z.head(dof);
    g.tail(dof) = z.tail(dof) / mass;
    return g;
  };
  h.kinetic_gradient = [mass](const RealVector& p) -> RealVector { return p / mass; };
  h.potential_gradient = [stiffness](const RealVector& q) -> RealVector {
    return stiffness * q;
  };
  return h;
}

HamiltonianField quartic_oscillator(double mass, double lambda, int dof) {
  if (!(mass > 0.0)) fail(ErrorCode::InvalidParameter, "mass must be positive");
  if (!(lambda > 0.0)) fail(ErrorCode::InvalidParameter, "quartic coupling must be positive");
  HamiltonianField h;
  h.name = "quartic(" + std::to_string(mass) + "," + std::to_string(lambda) + ")";
  h.dof = dof;
  h.evaluate = [mass, lambda, dof](const PhaseSpacePoint& z) {
    return z.tail(dof).squaredNorm() / (2.0 * mass) +
           lambda * z.head(dof).array().pow(4).sum();
  };
  h.gradient = [mass, lambda, dof](const PhaseSpacePoint& z) {
    RealVector g(2 * dof);
    g.head(dof) = 4.0 * lambda * z.head(dof).array().cube().matrix();
    g.tail(dof) = z.tail(dof) / mass;
    return g;
  };
  h.kinetic_gradient = [mass](const RealVector& p) -> RealVector { return p / mass; };
  h.potential_gradient = [lambda](const RealVector& q) -> RealVector {
    return 4.0 * lambda * q.array().cube().matrix();
  };
  return h;
}

HamiltonianField mirror(const HamiltonianField& h) {
  HamiltonianField m;
  m.name = "mirror(" + h.name + ")";
  m.dof = h.dof;
  m.evaluate = [f = h.evaluate](const PhaseSpacePoint& z) { return -f(z); };
  m.gradient = [g = h.gradient](const PhaseSpacePoint& z) -> RealVector { return -g(z); };
  if (h.separable()) {
    m.kinetic_gradient = [g = h.kinetic_gradient](const RealVector& p) -> RealVector {
      return -g(p);
    };
    m.potential_gradient = [g = h.potential_gradient](const RealVector& q) -> RealVector {
      return -g(q);
    };
  }
  return m;
}

HamiltonianField compose(const HamiltonianField& a, const HamiltonianField& b) {
  const int ka = a.dof;
  const int kb = b.dof;
  const int k = ka + kb;
  // (q_a, q_b, p_a, p_b) -> (q_a, p_a) and (q_b, p_b)
  auto split_a = [ka, kb](const RealVector& z) {
    RealVector out(2 * ka);
    out << z.head(ka), z.segment(ka + kb, ka);
    return out;
  };
  auto split_b = [ka, kb](const RealVector& z) {
    RealVector out(2 * kb);
    out << z.segment(ka, kb), z.tail(kb);
    return out;
  };
  HamiltonianField h;
  h.name = a.name + "+" + b.name;
  h.dof = k;
  h.evaluate = [a, b, split_a, split_b](const PhaseSpacePoint& z) {
    return a.evaluate(split_a(z)) + b.evaluate(split_b(z));
  };
  h.gradient = [a, b, split_a, split_b, ka, kb](const PhaseSpacePoint& z) {
    const RealVector ga = a.gradient(split_a(z));
    const RealVector gb = b.gradient(split_b(z));
    RealVector g(2 * (ka + kb));
    g << ga.head(ka), gb.head(kb), ga.tail(ka), gb.tail(kb);
    return g;
  };
  if (a.separable() && b.separable()) {
    h.kinetic_gradient = [a, b, ka, kb](const RealVector& p) -> RealVector {
      RealVector g(ka + kb);
      g << a.kinetic_gradient(p.head(ka)), b.kinetic_gradient(p.tail(kb));
      return g;
    };
    h.potential_gradient = [a, b, ka, kb](const RealVector& q) -> RealVector {
      RealVector g(ka + kb);
      g << a.potential_gradient(q.head(ka)), b.potential_gradient(q.tail(kb));
      return g;
    };
  }
  return h;
}

HamiltonianField observable(std::string name, int dof, ScalarFn f, VectorFn grad) {
  HamiltonianField h;
  h.name = std::move(name);
  h.dof = dof;
  h.evaluate = std::move(f);
  h.gradient = std::move(grad);
  return h;
}

double SystemId::potential(double q) const {
  double v = 0.0;
  switch (kind) {
    case Kind::FreeParticle: v = 0.0; break;
    case Kind::Harmonic: v = 0.5 * mass * omega * omega * q * q; break;
    case Kind::Quartic: v = lambda * q * q * q * q; break;
  }
  return mirrored ? -v : v;
}

namespace {

std::string format_number(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

std::string strip(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

std::vector<double> parse_args(const std::string& args, const std::string& whole) {
  std::vector<double> out;
  if (args.empty()) return out;
  std::stringstream stream(args);
  std::string item;
  while (std::getline(stream, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) {
      fail(ErrorCode::Config, "bad numeric argument '" + item + "' in system id '" + whole + "'");
    }
    out.push_back(value);
  }
  return out;
}

}  // namespace

std::string SystemId::to_string() const {
  std::string base;
  switch (kind) {
    case Kind::FreeParticle: base = "free_particle(" + format_number(mass) + ")"; break;
    case Kind::Harmonic:
      base = "harmonic(" + format_number(mass) + "," + format_number(omega) + ")";
      break;
    case Kind::Quartic:
      base = "quartic(" + format_number(mass) + "," + format_number(lambda) + ")";
      break;
  }
  return mirrored ? "mirror(" + base + ")" : base;
}

SystemId parse_system_id(const std::string& raw) {
  const std::string id = strip(raw);
  const auto open = id.find('(');
  if (open == std::string::npos || id.back() != ')') {
    fail(ErrorCode::Config, "malformed system id '" + raw + "'");
  }
  const std::string head = id.substr(0, open);
  const std::string inner = id.substr(open + 1, id.size() - open - 2);

  if (head == "mirror") {
    SystemId base = parse_system_id(inner);
    base.mirrored = !base.mirrored;
    return base;
  }

  const std::vector<double> args = parse_args(inner, raw);
  SystemId out;
  if (head == "free_particle") {
    if (args.size() > 1) fail(ErrorCode::Config, "free_particle takes (m): '" + raw + "'");
    out.kind = SystemId::Kind::FreeParticle;
    out.mass = args.empty() ? 1.0 : args[0];
  } else if (head == "harmonic") {
    if (args.size() != 2) fail(ErrorCode::Config, "harmonic takes (m,omega): '" + raw + "'");
    out.kind = SystemId::Kind::Harmonic;
    out.mass = args[0];
    out.omega = args[1];
    if (!(out.omega > 0.0)) fail(ErrorCode::Config, "harmonic frequency must be positive");
  } else if (head == "quartic") {
    if (args.size() != 2) fail(ErrorCode::Config, "quartic takes (m,lambda): '" + raw + "'");
    out.kind = SystemId::Kind::Quartic;
    out.mass = args[0];
    out.lambda = args[1];
    if (!(out.lambda > 0.0)) fail(ErrorCode::Config, "quartic coupling must be positive");
  } else {
    fail(ErrorCode::Config, "unknown system '" + head + "' in id '" + raw + "'");
  }
  if (!(out.mass > 0.0)) fail(ErrorCode::Config, "mass must be positive in '" + raw + "'");
  return out;
}

HamiltonianField make_system(const SystemId& id, int dof) {
  HamiltonianField h;
  switch (id.kind) {
    case SystemId::Kind::FreeParticle: h = free_particle(id.mass, dof); break;
    case SystemId::Kind::Harmonic: h = harmonic_oscillator(id.mass, id.omega, dof); break;
    case SystemId::Kind::Quartic: h = quartic_oscillator(id.mass, id.lambda, dof); break;
  }
  if (id.mirrored) h = mirror(h);
  h.name = id.to_string();
  return h;
}

HamiltonianField make_system(const std::string& id, int dof) {
  return make_system(parse_system_id(id), dof);
}

}  // namespace timeless
