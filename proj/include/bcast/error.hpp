#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bcast {

enum class ErrorCode {
  InvalidArgument,
  SourceHasInEdges,
  CyclicGraph,
  NotConnected,
  TooManyNodes,
  SizeLimit,
  TooManyActivations,
  InvalidExplicitVector,
  EmptyActivationSet,
  InvalidTree,
  NotUnitCapacity,
  NotDag,
  RateTooHigh,
  Unreachable,
  UnknownScenario,
  UnknownPolicy,
  ParseError,
  ValidationError,
};

constexpr std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SourceHasInEdges: return "SourceHasInEdges";
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::TooManyNodes: return "TooManyNodes";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::TooManyActivations: return "TooManyActivations";
    case ErrorCode::InvalidExplicitVector: return "InvalidExplicitVector";
    case ErrorCode::EmptyActivationSet: return "EmptyActivationSet";
    case ErrorCode::InvalidTree: return "InvalidTree";
    case ErrorCode::NotUnitCapacity: return "NotUnitCapacity";
    case ErrorCode::NotDag: return "NotDag";
    case ErrorCode::RateTooHigh: return "RateTooHigh";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::UnknownPolicy: return "UnknownPolicy";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

/// Raised when a DAG was required; holds the node sequence of one directed
/// cycle, first node repeated at the end.
class CyclicGraphError : public Error {
 public:
  CyclicGraphError(std::vector<std::size_t> cycle, const std::string& message)
      : Error(ErrorCode::CyclicGraph, message), cycle_(std::move(cycle)) {}

  const std::vector<std::size_t>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<std::size_t> cycle_;
};

}  // namespace bcast
