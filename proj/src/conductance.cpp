#include "treepoly/conductance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

#include "treepoly/errors.hpp"
#include "treepoly/strings.hpp"

namespace treepoly {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kProbabilitySumTolerance = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void validate_atoms(const std::vector<double>& values,
                    const std::vector<double>& probs) {
  require(!values.empty(), "discrete law needs at least one atom");
  require(values.size() == probs.size(),
          "discrete law: values and probabilities differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]), "discrete law: non-finite value");
    require(probs[i] >= 0.0 && probs[i] <= 1.0,
            "discrete law: probability outside [0,1]");
    total += probs[i];
  }
  require(std::abs(total - 1.0) <= kProbabilitySumTolerance,
          "discrete law: probabilities do not sum to 1");
}

// log-sum-exp of log(p_i) - beta * v_i over atoms with p_i > 0.
TiltedMoments atom_tilted_moments(const Atoms& at, double beta) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < at.values.size(); ++i) {
    if (at.probs[i] > 0.0) {
      top = std::max(top, std::log(at.probs[i]) - beta * at.values[i]);
    }
  }
  double mass = 0.0;
  double first = 0.0;
  for (std::size_t i = 0; i < at.values.size(); ++i) {
    if (at.probs[i] <= 0.0) continue;
    const double w = std::exp(std::log(at.probs[i]) - beta * at.values[i] - top);
    mass += w;
    first += w * at.values[i];
  }
  TiltedMoments out;
  out.log_lambda = top + std::log(mass);
  out.mean = first / mass;
  double centered = 0.0;
  for (std::size_t i = 0; i < at.values.size(); ++i) {
    if (at.probs[i] <= 0.0) continue;
    const double w = std::exp(std::log(at.probs[i]) - beta * at.values[i] - top);
    const double d = at.values[i] - out.mean;
    centered += w * d * d;
  }
  out.variance = centered / mass;
  return out;
}

void require_transform(const ConductanceLaw& law, double beta) {
  if (!laplace_exists(law, beta)) {
    throw DomainError("Laplace transform diverges at beta = " +
                      format_double(beta) + " for law " + format_law(law));
  }
}

std::vector<double> parse_list(std::string_view body, char sep) {
  std::vector<double> out;
  for (auto field : split(body, sep)) out.push_back(parse_double(field));
  return out;
}

}  // namespace

ConductanceLaw make_two_point(double a, double b, double p) {
  ConductanceLaw law = TwoPoint{a, b, p};
  validate(law);
  return law;
}

ConductanceLaw make_discrete(std::vector<double> values,
                             std::vector<double> probs) {
  ConductanceLaw law = FiniteDiscrete{std::move(values), std::move(probs)};
  validate(law);
  return law;
}

ConductanceLaw make_gaussian(double mean, double stdev) {
  ConductanceLaw law = Gaussian{mean, stdev};
  validate(law);
  return law;
}

ConductanceLaw make_exponential(double rate) {
  ConductanceLaw law = Exponential{rate};
  validate(law);
  return law;
}

ConductanceLaw make_constant(double x0) {
  ConductanceLaw law = Constant{x0};
  validate(law);
  return law;
}

void validate(const ConductanceLaw& law) {
  std::visit(
      Overloaded{
          [](const TwoPoint& l) {
            validate_atoms({l.a, l.b}, {l.p, 1.0 - l.p});
          },
          [](const FiniteDiscrete& l) { validate_atoms(l.values, l.probs); },
          [](const Gaussian& l) {
            require(std::isfinite(l.mean), "gaussian: non-finite mean");
            require(std::isfinite(l.stdev) && l.stdev >= 0.0,
                    "gaussian: stdev must be finite and >= 0");
          },
          [](const Exponential& l) {
            require(std::isfinite(l.rate) && l.rate > 0.0,
                    "exponential: rate must be > 0");
          },
          [](const Constant& l) {
            require(std::isfinite(l.x0), "constant: non-finite value");
          },
      },
      law);
}

ConductanceLaw parse_law(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("law spec '" + std::string(spec) +
                      "' has no ':' separating kind and parameters");
  }
  const auto kind = spec.substr(0, colon);
  const auto body = spec.substr(colon + 1);
  try {
    if (kind == "twopoint") {
      const auto v = parse_list(body, ',');
      require(v.size() == 3, "twopoint expects a,b,p");
      return make_two_point(v[0], v[1], v[2]);
    }
    if (kind == "discrete") {
      std::vector<double> values;
      std::vector<double> probs;
      for (auto atom : split(body, ',')) {
        const auto pair = parse_list(atom, ':');
        require(pair.size() == 2, "discrete atoms are written value:prob");
        values.push_back(pair[0]);
        probs.push_back(pair[1]);
      }
      return make_discrete(std::move(values), std::move(probs));
    }
    if (kind == "gaussian") {
      const auto v = parse_list(body, ',');
      require(v.size() == 2, "gaussian expects mean,stdev");
      return make_gaussian(v[0], v[1]);
    }
    if (kind == "exponential") {
      const auto v = parse_list(body, ',');
      require(v.size() == 1, "exponential expects rate");
      return make_exponential(v[0]);
    }
    if (kind == "constant") {
      const auto v = parse_list(body, ',');
      require(v.size() == 1, "constant expects x0");
      return make_constant(v[0]);
    }
  } catch (const ConfigError& e) {
    throw ConfigError("invalid law spec '" + std::string(spec) +
                      "': " + e.what());
  }
  throw ConfigError("unknown law kind '" + std::string(kind) + "'");
}

std::string format_law(const ConductanceLaw& law) {
  return std::visit(
      Overloaded{
          [](const TwoPoint& l) {
            return "twopoint:" + format_double(l.a) + "," + format_double(l.b) +
                   "," + format_double(l.p);
          },
          [](const FiniteDiscrete& l) {
            std::string out = "discrete:";
            for (std::size_t i = 0; i < l.values.size(); ++i) {
              if (i) out += ',';
              out += format_double(l.values[i]) + ":" + format_double(l.probs[i]);
            }
            return out;
          },
          [](const Gaussian& l) {
            return "gaussian:" + format_double(l.mean) + "," +
                   format_double(l.stdev);
          },
          [](const Exponential& l) {
            return "exponential:" + format_double(l.rate);
          },
          [](const Constant& l) { return "constant:" + format_double(l.x0); },
      },
      law);
}

bool laplace_exists(const ConductanceLaw& law, double beta) {
  if (!std::isfinite(beta)) return false;
  if (const auto* e = std::get_if<Exponential>(&law)) return beta > -e->rate;
  return true;
}

TiltedMoments tilted_moments(const ConductanceLaw& law, double beta) {
  require_transform(law, beta);
  return std::visit(
      Overloaded{
          [&](const Gaussian& l) {
            const double s2 = l.stdev * l.stdev;
            return TiltedMoments{-beta * l.mean + 0.5 * beta * beta * s2,
                                 l.mean - beta * s2, s2};
          },
          [&](const Exponential& l) {
            const double shifted = l.rate + beta;
            return TiltedMoments{std::log(l.rate / shifted), 1.0 / shifted,
                                 1.0 / (shifted * shifted)};
          },
          [&](const Constant& l) {
            return TiltedMoments{-beta * l.x0, l.x0, 0.0};
          },
          [&](const auto&) { return atom_tilted_moments(atoms(law), beta); },
      },
      law);
}

double log_laplace(const ConductanceLaw& law, double beta) {
  return tilted_moments(law, beta).log_lambda;
}

double laplace(const ConductanceLaw& law, double beta) {
  return std::exp(log_laplace(law, beta));
}

LaplaceDerivatives laplace_derivatives(const ConductanceLaw& law, double beta) {
  require_transform(law, beta);
  if (atom_count(law) > 0) {
    const auto at = atoms(law);
    LaplaceDerivatives out;
    for (std::size_t i = 0; i < at.values.size(); ++i) {
      const double w = at.probs[i] * std::exp(-beta * at.values[i]);
      out.first += w * at.values[i];
      out.second += w * at.values[i] * at.values[i];
    }
    return out;
  }
  const auto tm = tilted_moments(law, beta);
  const double lambda = std::exp(tm.log_lambda);
  return {lambda * tm.mean, lambda * (tm.variance + tm.mean * tm.mean)};
}

std::size_t atom_count(const ConductanceLaw& law) {
  return std::visit(Overloaded{
                        [](const TwoPoint&) -> std::size_t { return 2; },
                        [](const FiniteDiscrete& l) { return l.values.size(); },
                        [](const Constant&) -> std::size_t { return 1; },
                        [](const auto&) -> std::size_t { return 0; },
                    },
                    law);
}

Atoms atoms(const ConductanceLaw& law) {
  Atoms raw = std::visit(
      Overloaded{
          [](const TwoPoint& l) { return Atoms{{l.a, l.b}, {l.p, 1.0 - l.p}}; },
          [](const FiniteDiscrete& l) { return Atoms{l.values, l.probs}; },
          [](const Constant& l) { return Atoms{{l.x0}, {1.0}}; },
          [](const auto&) -> Atoms {
            throw DomainError("continuous law has no atoms");
          },
      },
      law);
  std::vector<std::size_t> order(raw.values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return raw.values[i] < raw.values[j];
  });
  Atoms sorted;
  for (auto i : order) {
    sorted.values.push_back(raw.values[i]);
    sorted.probs.push_back(raw.probs[i]);
  }
  return sorted;
}

std::vector<double> cumulative_probs(const Atoms& at) {
  std::vector<double> cum(at.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < at.probs.size(); ++i) {
    acc += at.probs[i];
    cum[i] = acc;
  }
  return cum;
}

std::size_t pick_atom(const std::vector<double>& cumulative, double u) {
  for (std::size_t i = 0; i + 1 < cumulative.size(); ++i) {
    if (u < cumulative[i]) return i;
  }
  return cumulative.size() - 1;
}

double quantile(const ConductanceLaw& law, double u) {
  return std::visit(
      Overloaded{
          [&](const Gaussian& l) { return l.mean + l.stdev * normal_quantile(u); },
          [&](const Exponential& l) { return -std::log1p(-u) / l.rate; },
          [&](const Constant& l) { return l.x0; },
          [&](const auto&) {
            const auto at = atoms(law);
            return at.values[pick_atom(cumulative_probs(at), u)];
          },
      },
      law);
}

double cdf(const ConductanceLaw& law, double x) {
  return std::visit(
      Overloaded{
          [&](const Gaussian& l) {
            if (l.stdev == 0.0) return x >= l.mean ? 1.0 : 0.0;
            return 0.5 * std::erfc(-(x - l.mean) / (l.stdev * std::sqrt(2.0)));
          },
          [&](const Exponential& l) {
            return x <= 0.0 ? 0.0 : -std::expm1(-l.rate * x);
          },
          [&](const auto&) {
            const auto at = atoms(law);
            double acc = 0.0;
            for (std::size_t i = 0; i < at.values.size(); ++i) {
              if (at.values[i] <= x) acc += at.probs[i];
            }
            return std::min(acc, 1.0);
          },
      },
      law);
}

double normal_quantile(double u) {
  const double q = u - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

}  // namespace treepoly
