#ifndef RUMORSIM_MODEL_HPP
#define RUMORSIM_MODEL_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rumorsim {

/// Raised when an input violates a documented precondition or invariant.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ValidationIssue {
  std::string field;
  std::string message;
};

/// Accumulated invariant violations, reported by field name.
struct ValidationResult {
  std::vector<ValidationIssue> violations;

  bool ok() const { return violations.empty(); }

  void merge(ValidationResult other) {
    for (auto& v : other.violations) violations.push_back(std::move(v));
  }

  std::string describe() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v.field + ": " + v.message;
    }
    return out;
  }

  /// Throw ValidationError unless everything passed.
  void require() const {
    if (!ok()) throw ValidationError(describe());
  }
};

/// Rate and weight constants of the four-compartment rumor/refutation model.
///
/// b1, b2 and o are dimensionless fractions in [0,1]; the w's are effective
/// contacts per node per day in the rumor-spreading, rumor-dispelling and
/// replacement channels; r1, r2 are per-day fade-out rates; n is the total
/// population size.
struct ModelParams {
  double b1 = 0.0;  ///< adoption fraction for rumor contacts
  double b2 = 0.0;  ///< adoption fraction for refutation contacts
  double o = 0.0;   ///< replacement efficiency, rumor spreader -> refuter
  double w1 = 0.0;  ///< contacts/node/day in the rumor-spreading process
  double w2 = 0.0;  ///< contacts/node/day in the rumor-dispelling process
  double w3 = 0.0;  ///< contacts/node/day in the replacement process
  double r1 = 0.0;  ///< rumor fade-out rate, 1/day
  double r2 = 0.0;  ///< refutation fade-out rate, 1/day
  double n = 0.0;   ///< total population size

  bool operator==(const ModelParams&) const = default;
};

/// Check every ModelParams invariant; total function, returns all violations.
inline ValidationResult validate_params(const ModelParams& p) {
  ValidationResult res;
  auto fraction = [&](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) res.violations.push_back({name, "must be in [0, 1]"});
  };
  auto nonneg = [&](const char* name, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) res.violations.push_back({name, "must be finite and >= 0"});
  };
  fraction("b1", p.b1);
  fraction("b2", p.b2);
  fraction("o", p.o);
  nonneg("w1", p.w1);
  nonneg("w2", p.w2);
  nonneg("w3", p.w3);
  nonneg("r1", p.r1);
  nonneg("r2", p.r2);
  if (!(p.n > 0.0) || !std::isfinite(p.n)) res.violations.push_back({"n", "must be finite and > 0"});
  return res;
}

/// Compartment occupancies at one instant: susceptible (s), rumor spreaders
/// (ia), refutation spreaders (ib), faded out (r). Real-valued; the discrete
/// simulator stores exact integer counts in the same type.
struct StateVec {
  double s = 0.0;
  double ia = 0.0;
  double ib = 0.0;
  double r = 0.0;

  double sum() const { return s + ia + ib + r; }

  bool finite() const {
    return std::isfinite(s) && std::isfinite(ia) && std::isfinite(ib) && std::isfinite(r);
  }

  StateVec clamped_nonnegative() const {
    return {s < 0.0 ? 0.0 : s, ia < 0.0 ? 0.0 : ia, ib < 0.0 ? 0.0 : ib, r < 0.0 ? 0.0 : r};
  }

  bool operator==(const StateVec&) const = default;
};

inline StateVec operator+(const StateVec& a, const StateVec& b) {
  return {a.s + b.s, a.ia + b.ia, a.ib + b.ib, a.r + b.r};
}

inline StateVec operator-(const StateVec& a, const StateVec& b) {
  return {a.s - b.s, a.ia - b.ia, a.ib - b.ib, a.r - b.r};
}

inline StateVec operator*(double k, const StateVec& a) {
  return {k * a.s, k * a.ia, k * a.ib, k * a.r};
}

inline ValidationResult validate_state(const StateVec& x) {
  ValidationResult res;
  auto check = [&](const char* name, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) res.violations.push_back({name, "must be finite and >= 0"});
  };
  check("s", x.s);
  check("ia", x.ia);
  check("ib", x.ib);
  check("r", x.r);
  return res;
}

/// Which right-hand side to evaluate.
///
/// Literal is the model family's classical form: it loses total mass through
/// the replacement channel (subtracted from both spreader compartments) and
/// through contacts that do not adopt (removed from S but credited nowhere).
/// Conserving flips the replacement sign in the refuter equation and charges
/// S only for adopting contacts, so s + ia + ib + r stays constant.
enum class RhsMode { Literal, Conserving };

inline const char* to_string(RhsMode m) {
  return m == RhsMode::Literal ? "literal" : "conserving";
}

namespace detail {

// Shared kernel; assumes inputs were already validated. The integrator calls
// this directly so that clamp-off runs can carry tiny negative excursions.
inline StateVec rhs_unchecked(const StateVec& x, const ModelParams& p, RhsMode mode) {
  const double contact_a = (p.w1 / p.n) * x.ia * x.s;  // rumor contact flux
  const double contact_b = (p.w2 / p.n) * x.ib * x.s;  // refutation contact flux
  const double adopt_a = p.b1 * contact_a;
  const double adopt_b = p.b2 * contact_b;
  const double repl = p.o * (p.w3 / p.n) * x.ia * x.ib;
  const double fade_a = p.r1 * x.ia;
  const double fade_b = p.r2 * x.ib;
  if (mode == RhsMode::Literal) {
    return {-contact_a - contact_b,
            adopt_a - repl - fade_a,
            adopt_b - repl - fade_b,
            fade_a + fade_b};
  }
  return {-adopt_a - adopt_b,
          adopt_a - repl - fade_a,
          adopt_b + repl - fade_b,
          fade_a + fade_b};
}

}  // namespace detail

/// Time derivative of the compartments, counts per day. Pure.
/// Preconditions: valid params, non-negative finite state; violations throw.
inline StateVec rhs(const StateVec& state, const ModelParams& params, RhsMode mode) {
  ValidationResult res = validate_params(params);
  res.merge(validate_state(state));
  res.require();
  return detail::rhs_unchecked(state, params, mode);
}

}  // namespace rumorsim

#endif  // RUMORSIM_MODEL_HPP
