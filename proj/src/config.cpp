// SPDX-License-Identifier: Apache-2.0

#include "handball/config.hpp"

#include "handball/errors.hpp"

namespace handball {

void SystemConfig::validate() const {
  if (n_tx < 1) throw SpecValidationError("n_tx", "must be a positive integer");
  if (n_rx < 1) throw SpecValidationError("n_rx", "must be a positive integer");
  if (n_users < 1) throw SpecValidationError("n_users", "must be a positive integer");
  if (n_targets < 1) throw SpecValidationError("n_targets", "must be a positive integer");
  if (n_paths < 1) throw SpecValidationError("n_paths", "must be a positive integer");
  if (grid_size < 1) throw SpecValidationError("grid_size", "must be a positive integer");
  if (n_rf != n_users + n_targets)
    throw SpecValidationError("n_rf", "must equal n_users + n_targets");
  if (grid_size < n_rf) throw SpecValidationError("grid_size", "must be >= n_rf");
  if (bits < 1) throw SpecValidationError("bits", "must be >= 1 (or the infinite marker)");
  if (!(p_s > 0.0)) throw SpecValidationError("p_s", "must be strictly positive");
  if (!(p_max > 0.0)) throw SpecValidationError("p_max", "must be strictly positive");
  if (!(noise_var >= 0.0)) throw SpecValidationError("noise_var", "must be non-negative");
  if (!(eta >= 0.0 && eta <= 1.0)) throw SpecValidationError("eta", "must lie in [0, 1]");
}

}  // namespace handball
