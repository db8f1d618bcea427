#include "holomap/holomap.h"

#include <cstring>
#include <fstream>
#include <new>
#include <sstream>

#include "modelfile.hpp"
#include "models.hpp"
#include "runner.hpp"

struct hm_model {
  holomap::modelfile::Model m;
};

namespace {

void put_err(char* err, int errcap, const char* msg) {
  if (!err || errcap <= 0) return;
  std::strncpy(err, msg, static_cast<size_t>(errcap - 1));
  err[errcap - 1] = '\0';
}

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
hm_model* make_model(char* err, int errcap, F&& build) {
  try {
    auto* m = new hm_model{build()};
    return m;
  } catch (const std::exception& e) {
    put_err(err, errcap, e.what());
    return nullptr;
  }
}

} // namespace

extern "C" {

void hm_options_init(hm_options* opts) {
  if (!opts) return;
  opts->eps = -1.0;
  opts->steps = -1;
  opts->grid = -1;
  opts->tol_rank = -1.0;
  opts->tol_cert = -1.0;
  opts->tol_deg = -1.0;
}

hm_model* hm_model_from_text(const char* text, char* err, int errcap) {
  if (!text) {
    put_err(err, errcap, "null model text");
    return nullptr;
  }
  return make_model(err, errcap, [&] { return holomap::modelfile::parse_model(text); });
}

hm_model* hm_model_from_file(const char* path, char* err, int errcap) {
  if (!path) {
    put_err(err, errcap, "null path");
    return nullptr;
  }
  return make_model(err, errcap, [&] {
    std::ifstream in(path);
    if (!in) throw holomap::Error(std::string("cannot open model file '") + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return holomap::modelfile::parse_model(ss.str());
  });
}

hm_model* hm_model_builtin(const char* name, char* err, int errcap) {
  if (!name) {
    put_err(err, errcap, "null model name");
    return nullptr;
  }
  return make_model(err, errcap, [&] { return holomap::models::builtin(name); });
}

void hm_model_free(hm_model* model) { delete model; }

char* hm_model_to_text(const hm_model* model) {
  if (!model) return nullptr;
  try {
    return dup_string(holomap::modelfile::to_text(model->m));
  } catch (const std::exception&) {
    return nullptr;
  }
}

hm_status hm_run(const hm_model* model, const char* command, const hm_options* opts,
                 const char* arg, char** json_out, char* err, int errcap) {
  if (!command) {
    put_err(err, errcap, "null command");
    return HM_ERROR;
  }
  try {
    holomap::runner::Options ro;
    if (opts) {
      ro.eps = opts->eps;
      ro.steps = opts->steps;
      ro.grid = opts->grid;
      ro.tol_rank = opts->tol_rank;
      ro.tol_cert = opts->tol_cert;
      ro.tol_deg = opts->tol_deg;
    }
    static const holomap::modelfile::Model empty_model;
    const holomap::modelfile::Model& m = model ? model->m : empty_model;
    if (!model && std::string(command) != "example")
      throw holomap::Error("command needs a model (only 'example' runs without one)");
    auto result = holomap::runner::run(m, command, ro, arg ? arg : "");
    if (json_out) {
      *json_out = dup_string(result.report.dump(2));
      if (!*json_out) {
        put_err(err, errcap, "out of memory");
        return HM_ERROR;
      }
    }
    return result.exit_code == 2 ? HM_SINGULAR : HM_OK;
  } catch (const std::exception& e) {
    put_err(err, errcap, e.what());
    return HM_ERROR;
  }
}

void hm_string_free(char* s) { delete[] s; }

} // extern "C"
