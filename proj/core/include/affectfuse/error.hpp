#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace affectfuse {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AFFECTFUSE_DEFINE_ERROR(Name)          \
  class Name : public Error {                  \
   public:                                     \
    using Error::Error;                        \
  }

// corpus
AFFECTFUSE_DEFINE_ERROR(LabelError);
AFFECTFUSE_DEFINE_ERROR(EmptyDataset);
AFFECTFUSE_DEFINE_ERROR(SizeError);

// llm responses
AFFECTFUSE_DEFINE_ERROR(TransportError);
AFFECTFUSE_DEFINE_ERROR(EmptyResponse);

// features and binary formats
AFFECTFUSE_DEFINE_ERROR(EmptyCorpus);
AFFECTFUSE_DEFINE_ERROR(DimMismatch);
AFFECTFUSE_DEFINE_ERROR(FormatError);
AFFECTFUSE_DEFINE_ERROR(DimZero);

// neural network
AFFECTFUSE_DEFINE_ERROR(RangeError);

// fusion
AFFECTFUSE_DEFINE_ERROR(IdMismatch);
AFFECTFUSE_DEFINE_ERROR(LengthMismatch);
AFFECTFUSE_DEFINE_ERROR(EmptyList);

// tuning
AFFECTFUSE_DEFINE_ERROR(AllTrialsDiverged);

// evaluation
AFFECTFUSE_DEFINE_ERROR(EmptyEvaluation);
AFFECTFUSE_DEFINE_ERROR(DegenerateClass);

// cli
AFFECTFUSE_DEFINE_ERROR(ConfigError);

#undef AFFECTFUSE_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class ApiError : public Error {
 public:
  ApiError(int status, std::string body)
      : Error("chat endpoint returned HTTP " + std::to_string(status)),
        status_(status),
        body_(std::move(body)) {}
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

class MissingId : public Error {
 public:
  explicit MissingId(std::string id)
      : Error("embedding table has no vector for id '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(int epoch)
      : Error("training diverged: non-finite loss in epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class PlanSyntaxError : public Error {
 public:
  PlanSyntaxError(std::size_t position, const std::string& what)
      : Error("plan syntax error at position " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage " + stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace affectfuse
