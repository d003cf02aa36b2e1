#pragma once

#include <doctest.h>

#include <exception>

#include "heatlab/types.hpp"

// Runs fn expecting a heatlab::Error with the given code.
template <typename Fn>
void expect_error(heatlab::Errc expected, Fn&& fn) {
  try {
    fn();
    FAIL_CHECK("expected error '" << heatlab::errc_name(expected)
                                  << "' but nothing was thrown");
  } catch (const heatlab::Error& e) {
    if (e.code() != expected)
      FAIL_CHECK("expected error '" << heatlab::errc_name(expected) << "', got: "
                                    << e.what());
  } catch (const std::exception& e) {
    FAIL_CHECK("expected heatlab::Error, got: " << e.what());
  }
}
