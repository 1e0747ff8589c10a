#pragma once

#include <functional>

#include <gtest/gtest.h>

#include "synpatch/error.hpp"

namespace synpatch::testing {

// Code of the Error thrown by f; records a failure when nothing is thrown.
inline Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InterpreterBug;
}

}  // namespace synpatch::testing
