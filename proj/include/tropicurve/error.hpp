#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tropicurve {

enum class ErrorCode {
  ParseError,
  DisconnectedGraph,
  NonpositiveLength,
  DanglingEndpoint,
  PointIsVertex,
  PointsNotOnEdge,
  PointNotInterior,
  WrongCardinality,
  NonzeroDegree,
  NotPrincipal,
  WrongDegree,
  InvalidPillars,
  NotComplement,
  EmptyCoordinates,
  ContractedEdge,
  DivisorCollision,
  NonSimplePoint,
  InvalidFunction,
  PillarSearchExhausted,
  NotSeparated,
  PillarFailure,
  NoRoom,
  EqualEdges,
  Stage0Failure,
  CertificateFailure,
  MonotonicityViolation,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::NonpositiveLength: return "NonpositiveLength";
    case ErrorCode::DanglingEndpoint: return "DanglingEndpoint";
    case ErrorCode::PointIsVertex: return "PointIsVertex";
    case ErrorCode::PointsNotOnEdge: return "PointsNotOnEdge";
    case ErrorCode::PointNotInterior: return "PointNotInterior";
    case ErrorCode::WrongCardinality: return "WrongCardinality";
    case ErrorCode::NonzeroDegree: return "NonzeroDegree";
    case ErrorCode::NotPrincipal: return "NotPrincipal";
    case ErrorCode::WrongDegree: return "WrongDegree";
    case ErrorCode::InvalidPillars: return "InvalidPillars";
    case ErrorCode::NotComplement: return "NotComplement";
    case ErrorCode::EmptyCoordinates: return "EmptyCoordinates";
    case ErrorCode::ContractedEdge: return "ContractedEdge";
    case ErrorCode::DivisorCollision: return "DivisorCollision";
    case ErrorCode::NonSimplePoint: return "NonSimplePoint";
    case ErrorCode::InvalidFunction: return "InvalidFunction";
    case ErrorCode::PillarSearchExhausted: return "PillarSearchExhausted";
    case ErrorCode::NotSeparated: return "NotSeparated";
    case ErrorCode::PillarFailure: return "PillarFailure";
    case ErrorCode::NoRoom: return "NoRoom";
    case ErrorCode::EqualEdges: return "EqualEdges";
    case ErrorCode::Stage0Failure: return "Stage0Failure";
    case ErrorCode::CertificateFailure: return "CertificateFailure";
    case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace tropicurve
