#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "degel/expr.hpp"
#include "degel/solver.hpp"
#include "degel/spectral.hpp"

namespace degel {

/// exit codes: 2 parse error, 3 semantic validation error
struct ConfigError : std::runtime_error {
  int exit_code;
  int line;
  ConfigError(int code, int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg),
        exit_code(code),
        line(line_) {}
};

enum class ATensorKind { zero, scale_g, diag };
enum class EtaKind { zero, zeta };
enum class Topology { slab, box };

struct RunConfig {
  // [problem]
  int dimension = 3;
  std::vector<int> shape;
  Topology topology = Topology::slab;
  Expression warp;
  ATensorKind a_kind = ATensorKind::zero;
  Expression a_scale;              // scale_g
  std::vector<Expression> a_diag;  // diag
  EtaKind eta_kind = EtaKind::zero;
  std::vector<Expression> eta_zeta;
  Expression psi;
  Expression phi;

  // [operator]
  SpectralFunction f;

  // [solve] + [continuation]
  SolveConfig solve;
  bool degenerate_continuation = false;  // sweep targets eps -> 0

  // [subsolution]
  std::optional<Expression> base_expr;  // default: the phi expression
  std::optional<double> delta0;
  double A_cap = 1e12;

  // [manufactured]
  std::optional<Expression> u_star;
  std::vector<int> conv_grids = {9, 17, 33};

  // [diagnose]
  double collar_widths = 5.0;  // delta in mesh widths

  // [output]
  std::string out_dir = "out";

  // [lemma]
  int lemma_n_min = 3, lemma_n_max = 8;
  int lemma_count = 10000;
  std::uint64_t lemma_seed = 7;
};

/// Parses the line-oriented `[section]` / `key = value` format.  Unknown keys
/// and malformed lines raise ConfigError with exit code 2 and the line number;
/// semantic violations raise with exit code 3.  Overrides are
/// "section.key=value" assignments applied on top of the file (line 0).
RunConfig parse_config(const std::string& text,
                       const std::vector<std::string>& overrides = {});

}  // namespace degel
