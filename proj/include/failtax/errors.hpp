#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace failtax {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class IoFailure : public Error {
public:
    IoFailure(std::string path, const std::string& detail)
        : Error("I/O failure on '" + path + "': " + detail), path(std::move(path)) {}
    std::string path;
};

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line_no, std::string reason)
        : Error("malformed record at line " + std::to_string(line_no) + ": " + reason),
          line_no(line_no),
          reason(std::move(reason)) {}
    std::size_t line_no;
    std::string reason;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(std::string id)
        : Error("duplicate record id '" + id + "'"), id(std::move(id)) {}
    std::string id;
};

class InvalidGoldLabel : public Error {
public:
    InvalidGoldLabel(std::string id, std::string raw)
        : Error("record '" + id + "' carries gold label '" + raw +
                "' which is not a canonical failure type"),
          id(std::move(id)),
          raw(std::move(raw)) {}
    std::string id;
    std::string raw;
};

class EmptyCause : public Error {
public:
    EmptyCause() : Error("cause text is empty") {}
};

class MissingExamples : public Error {
public:
    MissingExamples() : Error("few-shot rendering requested with an empty example bank") {}
};

class BackendUnavailable : public Error {
public:
    explicit BackendUnavailable(const std::string& detail)
        : Error("backend unavailable: " + detail) {}
};

class InvalidCredential : public Error {
public:
    explicit InvalidCredential(const std::string& detail)
        : Error("invalid credential: " + detail) {}
};

class CacheMiss : public Error {
public:
    explicit CacheMiss(std::string record_id)
        : Error("replay cache miss for record '" + record_id + "'"),
          record_id(std::move(record_id)) {}
    std::string record_id;
};

class AllRecordsFailed : public Error {
public:
    AllRecordsFailed(std::size_t count, const std::string& detail)
        : Error("all " + std::to_string(count) + " records failed: " + detail) {}
};

class EmptyInput : public Error {
public:
    EmptyInput() : Error("empty input") {}
};

class EmptyMatrix : public Error {
public:
    EmptyMatrix() : Error("confusion matrix has no entries") {}
};

class EmptyBreakdown : public Error {
public:
    explicit EmptyBreakdown(const std::string& industry)
        : Error("industry breakdown for '" + industry + "' has no records") {}
};

class MismatchedPair : public Error {
public:
    explicit MismatchedPair(std::string record_id)
        : Error("classification result does not match record '" + record_id + "'"),
          record_id(std::move(record_id)) {}
    std::string record_id;
};

}  // namespace failtax
