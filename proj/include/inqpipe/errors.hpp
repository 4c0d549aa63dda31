// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>

namespace inqpipe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define INQPIPE_ERROR(Name)                                              \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

// corpus
class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line_no, const std::string& reason)
        : Error("MalformedRecord: line " + std::to_string(line_no) + ": " + reason),
          line_no(line_no),
          reason(reason) {}
    std::size_t line_no;
    std::string reason;
};
INQPIPE_ERROR(SpanOutOfBounds);
INQPIPE_ERROR(DuplicateId);
INQPIPE_ERROR(MissingControl);
INQPIPE_ERROR(OtherNotGeneratable);
INQPIPE_ERROR(EmptyQuestion);
INQPIPE_ERROR(NotEnoughInstances);

// textproc / metrics
INQPIPE_ERROR(InvalidN);
INQPIPE_ERROR(EmptyCorpus);
INQPIPE_ERROR(EmptySpan);
INQPIPE_ERROR(InvalidDistribution);
INQPIPE_ERROR(EmptySequence);
INQPIPE_ERROR(LengthMismatch);
INQPIPE_ERROR(EmptyList);

// ranking
INQPIPE_ERROR(MissingQuestion);
INQPIPE_ERROR(InvalidRanks);
INQPIPE_ERROR(CountTooLarge);
INQPIPE_ERROR(OracleFailure);

// annotation
INQPIPE_ERROR(EmptyInput);
INQPIPE_ERROR(InstanceMismatch);
INQPIPE_ERROR(MalformedResponse);

// modelio
INQPIPE_ERROR(Timeout);
INQPIPE_ERROR(BadResponse);
INQPIPE_ERROR(LengthViolation);
INQPIPE_ERROR(OutOfRange);
INQPIPE_ERROR(EmptyText);
INQPIPE_ERROR(NonPositiveInput);

// cli
INQPIPE_ERROR(MissingType);
INQPIPE_ERROR(MissingInput);
INQPIPE_ERROR(AlignmentError);
INQPIPE_ERROR(ConfigError);

#undef INQPIPE_ERROR

/// Hook for non-fatal diagnostics (0/0 ratios, degenerate kappa inputs).
/// Defaults to stderr; tests may swap it out.
inline std::function<void(const std::string&)>& warning_handler() {
    static std::function<void(const std::string&)> handler =
        [](const std::string& msg) { std::cerr << "inqpipe: warning: " << msg << "\n"; };
    return handler;
}

inline void warn(const std::string& msg) { warning_handler()(msg); }

}  // namespace inqpipe
