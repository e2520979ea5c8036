#pragma once

#include <string>

#include "doctest.h"
#include "sim/errors.hpp"

// Asserts that `expr` throws SimError with the given kind.
#define CHECK_FAILS(kind_, expr)                          \
  do {                                                    \
    bool threw_ = false;                                  \
    try {                                                 \
      expr;                                               \
    } catch (const sim::SimError& err_) {                 \
      threw_ = true;                                      \
      CHECK(err_.kind() == (kind_));                      \
    }                                                     \
    CHECK_MESSAGE(threw_, "expected SimError from " #expr); \
  } while (0)

namespace testsupport {

// Runs `fn`, requires a SimError of `kind`, and returns its message so the
// caller can assert on details like line numbers.
template <typename Fn>
std::string error_message(sim::ErrorKind kind, Fn&& fn) {
  try {
    fn();
  } catch (const sim::SimError& err) {
    CHECK(err.kind() == kind);
    return err.what();
  }
  FAIL("expected SimError");
  return "";
}

}  // namespace testsupport
