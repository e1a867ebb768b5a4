#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hetqa {

// Root of every error raised by the engine. Callers that only need a
// message can catch this; the subclasses carry structured fields.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::string file, std::size_t line, std::string reason)
      : Error(file + ":" + std::to_string(line) + ": " + reason),
        file_(std::move(file)),
        line_(line),
        reason_(std::move(reason)) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string reason_;
};

class DanglingReference : public Error {
 public:
  explicit DanglingReference(std::string id)
      : Error("dangling reference to " + id), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected)
      : Error("parse error at byte " + std::to_string(offset) + ": expected " + expected),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class UnboundProjection : public Error {
 public:
  explicit UnboundProjection(const std::string& var)
      : Error("projected variable ?" + var + " does not occur in any pattern") {}
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id) : Error("duplicate passage id " + id) {}
};

class ProviderUnavailable : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NoEntityMatch : public Error {
 public:
  NoEntityMatch() : Error("no entity matched the query mention") {}
};

class FixtureMiss : public Error {
 public:
  explicit FixtureMiss(std::string digest)
      : Error("no scripted response for prompt " + digest), digest_(std::move(digest)) {}
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

class MissingField : public Error {
 public:
  explicit MissingField(std::string field)
      : Error("completion has no '" + field + "' field"), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class MissingTrace : public Error {
 public:
  explicit MissingTrace(const std::string& id) : Error("no trace for record " + id) {}
};

class GenerationLeak : public Error {
 public:
  using Error::Error;
};

class CompositionLeak : public Error {
 public:
  CompositionLeak(std::string reason_code, const std::string& detail)
      : Error(reason_code + ": " + detail), reason_code_(std::move(reason_code)) {}
  const std::string& reason_code() const { return reason_code_; }

 private:
  std::string reason_code_;
};

class CircularQuestion : public Error {
 public:
  CircularQuestion() : Error("hop questions are identical") {}
};

class DistractorEqualsAnswer : public Error {
 public:
  using Error::Error;
};

class UnknownRecordId : public Error {
 public:
  explicit UnknownRecordId(const std::string& id) : Error("unknown record id " + id) {}
};

}  // namespace hetqa
