#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "r2d2/score.hpp"

namespace r2d2 {

/// Byte-level encoding of the score wire protocol. All integers and floats are
/// little-endian; payloads are row-major float32.
///
///   handshake (client):  "SCR1" u32 width u32 height
///   handshake (server):  "SCR1" f32 sigma_min f32 sigma_max
///   request:             u8 0x01, f32 sigma, width*height f32
///   response:            u8 0x02, width*height f32   |   u8 0xFF, u32 code
namespace wire {

inline constexpr char kMagic[4] = {'S', 'C', 'R', '1'};
inline constexpr std::uint8_t kTagRequest = 0x01;
inline constexpr std::uint8_t kTagResponse = 0x02;
inline constexpr std::uint8_t kTagError = 0xFF;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f32(std::vector<std::uint8_t>& out, float v);
std::uint32_t get_u32(std::span<const std::uint8_t, 4> in) noexcept;
float get_f32(std::span<const std::uint8_t, 4> in) noexcept;

std::vector<std::uint8_t> encode_client_hello(std::uint32_t width, std::uint32_t height);
std::vector<std::uint8_t> encode_server_hello(float sigma_min, float sigma_max);
std::vector<std::uint8_t> encode_request(float sigma, const Image& x);
std::vector<std::uint8_t> encode_response(const Image& field);
std::vector<std::uint8_t> encode_error(std::uint32_t code);

}  // namespace wire

/// Client session to an out-of-process score model over a local stream socket.
///
/// Addresses: "unix:/path/to/socket", "tcp:host:port" or "host:port". One request is in
/// flight at a time; concurrent callers are serialized.
class RemoteScore final : public ScoreModel {
 public:
  static RemoteScore connect(const std::string& address, std::size_t rows, std::size_t cols,
                             std::chrono::milliseconds timeout = std::chrono::seconds(60));

  RemoteScore(RemoteScore&&) noexcept;
  RemoteScore& operator=(RemoteScore&&) noexcept;
  ~RemoteScore() override;

  const std::string& address() const noexcept;
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;
  double advertised_sigma_min() const noexcept;
  double advertised_sigma_max() const noexcept;

  /// True when the advertised range contains [schedule.sigma_min, schedule.sigma_max].
  bool covers(const NoiseSchedule& schedule) const noexcept;
  bool covers(double sigma) const noexcept;

  /// One request/response exchange. Shape and sigma are validated before any write.
  ScoreField score(const Image& x, double sigma) const override;
  bool thread_safe() const noexcept override { return false; }

 private:
  struct Session;
  explicit RemoteScore(std::unique_ptr<Session> session);
  std::unique_ptr<Session> session_;
};

/// Remote session with the advertised range checked against `schedule`.
std::unique_ptr<RemoteScore> connect_remote_score(const std::string& address, std::size_t rows,
                                                  std::size_t cols,
                                                  const NoiseSchedule& schedule);

}  // namespace r2d2
