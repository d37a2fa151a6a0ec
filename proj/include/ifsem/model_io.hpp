// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <string>

#include "ifsem/em.hpp"
#include "ifsem/ifs_model.hpp"
#include "ifsem/mog.hpp"

namespace ifsem {

/// {h, k, d, components:[{s, r, t}], w, v, post:{s, r, t}} with rotations as
/// row-major flat arrays.
std::string ifs_model_to_json(const IfsModel& model);
void save_ifs_model(const std::string& path, const IfsModel& model);

/// Validates rotation invariants (tolerance 1e-6) and renormalizes w and v
/// when within 1e-6 of the simplex; rejects anything further off.
IfsModel ifs_model_from_json(const std::string& text);
IfsModel load_ifs_model(const std::string& path);

/// {k, h, mode, means, covariances, weights}.
std::string mog_model_to_json(const MogModel& model);
void save_mog_model(const std::string& path, const MogModel& model);
MogModel mog_model_from_json(const std::string& text);
MogModel load_mog_model(const std::string& path);

/// True when the file looks like a MOG model (has a "mode" field).
bool is_mog_model_file(const std::string& path);

/// JSON lines, one object per iteration:
/// {iter, mean_ll_test|null, mean_depth, v, seconds}. Wall-clock seconds are
/// only written when include_timings is set; otherwise the field is 0 so that
/// equal-seed runs produce byte-identical files.
void save_history(const std::string& path, const TrainHistory& history,
                  bool include_timings = false);

}  // namespace ifsem
