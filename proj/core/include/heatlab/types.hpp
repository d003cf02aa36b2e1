#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <string_view>

namespace heatlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Failure kinds surfaced by the library.  Each maps to a stable kebab-case
/// name used in CLI output and JSON reports.
enum class Errc {
  invalid_geometry,
  invalid_exhaustion,
  invalid_time,
  invalid_window,
  invalid_cutoff,
  insufficient_data,
  extension_refused,
  decomposition_failed,
  invalid_action,
  invalid_input,
  invalid_ball,
  not_applicable,
};

std::string_view errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

/// Outcome of a precondition-gated check.  not_applicable means the
/// hypotheses were not met; it is distinct from a genuine failure.
enum class Verdict { pass, fail, not_applicable };

std::string_view verdict_name(Verdict v);

}  // namespace heatlab
