#pragma once

#include "poromix/errors.hpp"
#include "poromix/model.hpp"
#include "poromix/scenarios.hpp"

#include <gtest/gtest.h>

#include <functional>

namespace poromix::testing {

/// Code of the poromix::Error thrown by f; records a failure if none is.
inline ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

inline ModelParams table1() { return scenario("convergence").params; }

/// The three parameter sets of the convergence and robustness studies.
inline std::vector<ModelParams> study_params() {
  return {scenario("convergence").params, scenario("robust_incompressible").params,
          scenario("robust_nodensity").params};
}

}  // namespace poromix::testing
