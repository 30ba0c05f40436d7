#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace r2d2 {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Precondition or argument-range violation.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// Image/config/report file problems.
class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

/// ROI whose standard deviation is zero.
class DegenerateRoiError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_roi"; }
};

class InternalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "internal"; }
};

enum class TransportErrc : std::uint8_t {
  connect_failed,
  handshake_failed,
  malformed_frame,
  server_error,
  shape_mismatch,
  sigma_out_of_range,
  io_failed,
};

const char* to_string(TransportErrc code) noexcept;

/// Failure talking to a remote score server. Never retried by the pipeline.
class TransportError : public Error {
 public:
  TransportError(TransportErrc code, const std::string& what, std::uint32_t server_code = 0)
      : Error(what), code_(code), server_code_(server_code) {}

  TransportErrc code() const noexcept { return code_; }
  /// Error code carried by a 0xFF frame; zero otherwise.
  std::uint32_t server_code() const noexcept { return server_code_; }
  const char* kind() const noexcept override { return "transport"; }

 private:
  TransportErrc code_;
  std::uint32_t server_code_;
};

}  // namespace r2d2
