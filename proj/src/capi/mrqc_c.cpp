// Copyright 2026 The mrqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mrqc/mrqc.h"

#include <string>

#include "mrqc/log.hpp"
#include "mrqc/phantom.hpp"
#include "mrqc/pipeline.hpp"

struct mrqc_config {
  mrqc::RunConfig config;
};

struct mrqc_run_result {
  mrqc::RunSummary summary;
  std::string path;
  std::size_t failed = 0;
};

struct mrqc_batch_result {
  mrqc::BatchSummary summary;
  std::string matrix_path, summary_path;
};

struct mrqc_phantom {
  mrqc::PhantomSpec spec;
};

namespace {

thread_local std::string last_error;

mrqc_status fail(mrqc_status code, std::string message) {
  last_error = std::move(message);
  return code;
}

template <typename F>
mrqc_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const std::exception& e) {
    return fail(MRQC_ERROR, e.what());
  } catch (...) {
    return fail(MRQC_ERROR, "unknown error");
  }
}

#define MRQC_REQUIRE(cond, what) \
  if (!(cond)) return fail(MRQC_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* mrqc_version(void) {
  static const std::string v(mrqc::version());
  return v.c_str();
}

const char* mrqc_last_error(void) { return last_error.c_str(); }

void mrqc_set_log_callback(mrqc_log_fn fn, void* user) {
  if (!fn) {
    mrqc::log::set_sink({});
    return;
  }
  mrqc::log::set_sink([fn, user](mrqc::log::Level level, std::string_view message) {
    const std::string text(message);
    fn(static_cast<mrqc_log_level>(level), text.c_str(), user);
  });
}

void mrqc_set_log_level(mrqc_log_level threshold) {
  mrqc::log::set_threshold(static_cast<mrqc::log::Level>(threshold));
}

mrqc_status mrqc_config_create(const char* output_name, const char* input_dir, mrqc_config** out) {
  MRQC_REQUIRE(out, "out is null");
  *out = nullptr;
  MRQC_REQUIRE(output_name && input_dir, "output name and input directory are required");
  return guarded([&] {
    auto* c = new mrqc_config;
    c->config.output_name = output_name;
    c->config.input_dir = input_dir;
    *out = c;
    return MRQC_OK;
  });
}

void mrqc_config_destroy(mrqc_config* config) { delete config; }

mrqc_status mrqc_config_set_tags_file(mrqc_config* config, const char* path) {
  MRQC_REQUIRE(config, "config is null");
  if (path) config->config.tags_file = path;
  else config->config.tags_file.reset();
  return MRQC_OK;
}

mrqc_status mrqc_config_set_per_object(mrqc_config* config, int per_object) {
  MRQC_REQUIRE(config, "config is null");
  config->config.per_object = per_object != 0;
  return MRQC_OK;
}

mrqc_status mrqc_config_set_seed(mrqc_config* config, uint64_t seed) {
  MRQC_REQUIRE(config, "config is null");
  config->config.seed = seed;
  return MRQC_OK;
}

mrqc_status mrqc_config_set_weights(mrqc_config* config, double original, double equalized) {
  MRQC_REQUIRE(config, "config is null");
  const mrqc::BlendWeights w{original, equalized};
  try {
    mrqc::validate(w);
  } catch (const std::exception& e) {
    return fail(MRQC_INVALID_ARGUMENT, e.what());
  }
  config->config.weights = w;
  return MRQC_OK;
}

mrqc_status mrqc_config_set_jobs(mrqc_config* config, unsigned jobs) {
  MRQC_REQUIRE(config, "config is null");
  MRQC_REQUIRE(jobs > 0, "jobs must be at least 1");
  config->config.jobs = jobs;
  return MRQC_OK;
}

mrqc_status mrqc_config_set_data_root(mrqc_config* config, const char* path) {
  MRQC_REQUIRE(config && path, "config and path are required");
  config->config.data_root = path;
  return MRQC_OK;
}

mrqc_status mrqc_config_set_thumbnails(mrqc_config* config, int enabled) {
  MRQC_REQUIRE(config, "config is null");
  config->config.thumbnails = enabled != 0;
  return MRQC_OK;
}

mrqc_status mrqc_run(const mrqc_config* config, mrqc_run_result** out) {
  MRQC_REQUIRE(config && out, "config and out are required");
  *out = nullptr;
  return guarded([&] {
    auto* r = new mrqc_run_result;
    try {
      r->summary = mrqc::run(config->config);
    } catch (...) {
      delete r;
      throw;
    }
    r->path = r->summary.results_path.string();
    for (const auto& t : r->summary.timings) {
      if (t.status != "ok") ++r->failed;
    }
    *out = r;
    return static_cast<mrqc_status>(r->summary.status);
  });
}

void mrqc_run_result_destroy(mrqc_run_result* result) { delete result; }
const char* mrqc_run_result_path(const mrqc_run_result* result) { return result ? result->path.c_str() : ""; }
size_t mrqc_run_result_rows(const mrqc_run_result* result) { return result ? result->summary.table.rows.size() : 0; }
size_t mrqc_run_result_failed(const mrqc_run_result* result) { return result ? result->failed : 0; }
double mrqc_run_result_seconds(const mrqc_run_result* result) { return result ? result->summary.seconds : 0.0; }

mrqc_status mrqc_analyze_batch(const char* results_tsv, const char* sites_tsv, int k, uint64_t seed,
                               int iterations, double subsample, unsigned jobs, mrqc_batch_result** out) {
  MRQC_REQUIRE(out, "out is null");
  *out = nullptr;
  MRQC_REQUIRE(results_tsv && sites_tsv, "results and sites paths are required");
  MRQC_REQUIRE(k >= 2, "k must be at least 2");
  MRQC_REQUIRE(iterations >= 1, "iterations must be at least 1");
  MRQC_REQUIRE(subsample > 0.0 && subsample <= 1.0, "subsample must be in (0, 1]");
  return guarded([&] {
    mrqc::BatchConfig config;
    config.results_path = results_tsv;
    config.sites_path = sites_tsv;
    config.options = {k, iterations, subsample, seed, jobs > 0 ? jobs : 1};
    auto* r = new mrqc_batch_result;
    try {
      r->summary = mrqc::analyze_batch(config);
    } catch (...) {
      delete r;
      throw;
    }
    r->matrix_path = r->summary.matrix_path.string();
    r->summary_path = r->summary.summary_path.string();
    *out = r;
    return MRQC_OK;
  });
}

void mrqc_batch_result_destroy(mrqc_batch_result* result) { delete result; }

size_t mrqc_batch_result_sites(const mrqc_batch_result* result) {
  return result ? result->summary.overlap.sites.size() : 0;
}

const char* mrqc_batch_result_site_name(const mrqc_batch_result* result, size_t site) {
  if (!result || site >= result->summary.overlap.sites.size()) return "";
  return result->summary.overlap.sites[site].c_str();
}

double mrqc_batch_result_accuracy(const mrqc_batch_result* result, size_t site) {
  if (!result || site >= result->summary.overlap.accuracy.size()) return -1.0;
  return result->summary.overlap.accuracy[site];
}

const char* mrqc_batch_result_matrix_path(const mrqc_batch_result* result) {
  return result ? result->matrix_path.c_str() : "";
}

const char* mrqc_batch_result_summary_path(const mrqc_batch_result* result) {
  return result ? result->summary_path.c_str() : "";
}

mrqc_status mrqc_phantom_create(const char* id, size_t slices, size_t rows, size_t cols, double foreground,
                                double background, uint64_t seed, mrqc_phantom** out) {
  MRQC_REQUIRE(out, "out is null");
  *out = nullptr;
  MRQC_REQUIRE(id && *id, "id is required");
  MRQC_REQUIRE(slices > 0 && rows > 0 && cols > 0, "dimensions must be positive");
  return guarded([&] {
    auto* p = new mrqc_phantom;
    p->spec.id = id;
    p->spec.dims = {slices, rows, cols};
    p->spec.fg_intensity = foreground;
    p->spec.bg_intensity = background;
    p->spec.seed = seed;
    *out = p;
    return MRQC_OK;
  });
}

void mrqc_phantom_destroy(mrqc_phantom* phantom) { delete phantom; }

mrqc_status mrqc_phantom_add_ellipse(mrqc_phantom* phantom, double center_row, double center_col, double radius_row,
                                     double radius_col) {
  MRQC_REQUIRE(phantom, "phantom is null");
  MRQC_REQUIRE(radius_row > 0 && radius_col > 0, "radii must be positive");
  phantom->spec.shapes.push_back({center_row, center_col, radius_row, radius_col});
  return MRQC_OK;
}

mrqc_status mrqc_phantom_set_spacing(mrqc_phantom* phantom, double x, double y, double z) {
  MRQC_REQUIRE(phantom, "phantom is null");
  MRQC_REQUIRE(x > 0 && y > 0 && z > 0, "spacing must be positive");
  phantom->spec.spacing = {x, y, z};
  return MRQC_OK;
}

mrqc_status mrqc_phantom_add_noise(mrqc_phantom* phantom, double sigma) {
  MRQC_REQUIRE(phantom, "phantom is null");
  MRQC_REQUIRE(sigma >= 0, "sigma must be non-negative");
  phantom->spec.artifacts.emplace_back(mrqc::GaussianNoise{sigma});
  return MRQC_OK;
}

mrqc_status mrqc_phantom_add_bias(mrqc_phantom* phantom, double strength) {
  MRQC_REQUIRE(phantom, "phantom is null");
  MRQC_REQUIRE(strength >= 0 && strength < 1, "bias strength must be in [0, 1)");
  phantom->spec.artifacts.emplace_back(mrqc::LinearBias{strength});
  return MRQC_OK;
}

mrqc_status mrqc_phantom_add_ghosting(mrqc_phantom* phantom, long shift, double alpha) {
  MRQC_REQUIRE(phantom, "phantom is null");
  MRQC_REQUIRE(alpha > 0 && alpha < 1, "ghost alpha must be in (0, 1)");
  phantom->spec.artifacts.emplace_back(mrqc::Ghosting{shift, alpha});
  return MRQC_OK;
}

mrqc_status mrqc_phantom_write_nifti(const mrqc_phantom* phantom, const char* path) {
  MRQC_REQUIRE(phantom && path, "phantom and path are required");
  return guarded([&] {
    mrqc::write_nifti(mrqc::generate(phantom->spec).volume, path);
    return MRQC_OK;
  });
}

}  // extern "C"
