#pragma once

#include <gtest/gtest.h>

#include <string>

#include "scb/errors.hpp"

namespace scb::testing {

/// Runs fn and returns the kind of the scb::Error it throws; fails the test if it
/// throws nothing or something else.
template <class Fn>
::testing::AssertionResult throws_kind(Fn&& fn, ErrorKind expected, std::string* message = nullptr) {
    try {
        fn();
    } catch (const Error& e) {
        if (message) *message = e.what();
        if (e.kind() == expected) return ::testing::AssertionSuccess();
        return ::testing::AssertionFailure() << "threw " << to_string(e.kind()) << ": " << e.what();
    } catch (const std::exception& e) {
        return ::testing::AssertionFailure() << "threw a foreign exception: " << e.what();
    }
    return ::testing::AssertionFailure() << "did not throw";
}

}  // namespace scb::testing
