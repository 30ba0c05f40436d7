#include "r2d2/remote_score.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <mutex>

#include "r2d2/errors.hpp"

namespace r2d2 {

namespace wire {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(std::span<const std::uint8_t, 4> in) noexcept {
  return static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
         (static_cast<std::uint32_t>(in[2]) << 16) | (static_cast<std::uint32_t>(in[3]) << 24);
}

float get_f32(std::span<const std::uint8_t, 4> in) noexcept {
  return std::bit_cast<float>(get_u32(in));
}

std::vector<std::uint8_t> encode_client_hello(std::uint32_t width, std::uint32_t height) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, width);
  put_u32(out, height);
  return out;
}

std::vector<std::uint8_t> encode_server_hello(float sigma_min, float sigma_max) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_f32(out, sigma_min);
  put_f32(out, sigma_max);
  return out;
}

std::vector<std::uint8_t> encode_request(float sigma, const Image& x) {
  std::vector<std::uint8_t> out;
  out.reserve(5 + 4 * x.size());
  out.push_back(kTagRequest);
  put_f32(out, sigma);
  for (double v : x.values()) put_f32(out, static_cast<float>(v));
  return out;
}

std::vector<std::uint8_t> encode_response(const Image& field) {
  std::vector<std::uint8_t> out;
  out.reserve(1 + 4 * field.size());
  out.push_back(kTagResponse);
  for (double v : field.values()) put_f32(out, static_cast<float>(v));
  return out;
}

std::vector<std::uint8_t> encode_error(std::uint32_t code) {
  std::vector<std::uint8_t> out{kTagError};
  put_u32(out, code);
  return out;
}

}  // namespace wire

namespace {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Socket() { reset(); }

  int fd() const noexcept { return fd_; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

[[noreturn]] void fail(TransportErrc code, const std::string& what) {
  throw TransportError(code, what);
}

Socket open_unix(const std::string& path) {
  sockaddr_un addr{};
  if (path.size() >= sizeof(addr.sun_path)) {
    fail(TransportErrc::connect_failed, "unix socket path too long: " + path);
  }
  Socket s(::socket(AF_UNIX, SOCK_STREAM, 0));
  if (s.fd() < 0) fail(TransportErrc::connect_failed, std::strerror(errno));
  addr.sun_family = AF_UNIX;
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    fail(TransportErrc::connect_failed,
         "cannot connect to unix:" + path + ": " + std::strerror(errno));
  }
  return s;
}

Socket open_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    fail(TransportErrc::connect_failed,
         "cannot resolve " + host + ":" + port + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (s.fd() < 0) continue;
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return s;
    }
    last_error = std::strerror(errno);
  }
  ::freeaddrinfo(res);
  fail(TransportErrc::connect_failed, "cannot connect to " + host + ":" + port + ": " + last_error);
}

Socket open_address(const std::string& address) {
  if (address.starts_with("unix:")) return open_unix(address.substr(5));
  std::string rest = address.starts_with("tcp:") ? address.substr(4) : address;
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
    fail(TransportErrc::connect_failed, "unrecognized score address '" + address + "'");
  }
  return open_tcp(rest.substr(0, colon), rest.substr(colon + 1));
}

void send_all(const Socket& s, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(s.fd(), bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(TransportErrc::io_failed, std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

// Reads exactly bytes.size() bytes; a peer close before that is a framing violation.
void recv_exact(const Socket& s, std::span<std::uint8_t> bytes, const char* what) {
  std::size_t got = 0;
  while (got < bytes.size()) {
    const ssize_t n = ::recv(s.fd(), bytes.data() + got, bytes.size() - got, 0);
    if (n == 0) {
      fail(TransportErrc::malformed_frame, std::string("connection closed inside ") + what +
                                               " after " + std::to_string(got) + " of " +
                                               std::to_string(bytes.size()) + " bytes");
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(TransportErrc::io_failed, std::string("recv failed: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(n);
  }
}

constexpr double kBoundsSlack = 1e-6;  // advertised bounds travel as float32

}  // namespace

struct RemoteScore::Session {
  std::string address;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  Socket socket;
  std::mutex in_flight;
};

RemoteScore::RemoteScore(std::unique_ptr<Session> session) : session_(std::move(session)) {}
RemoteScore::RemoteScore(RemoteScore&&) noexcept = default;
RemoteScore& RemoteScore::operator=(RemoteScore&&) noexcept = default;
RemoteScore::~RemoteScore() = default;

RemoteScore RemoteScore::connect(const std::string& address, std::size_t rows, std::size_t cols,
                                 std::chrono::milliseconds timeout) {
  if (rows == 0 || cols == 0 || rows > UINT32_MAX || cols > UINT32_MAX) {
    throw DomainError("remote score grid shape must be positive and fit in u32");
  }
  auto session = std::make_unique<Session>();
  session->address = address;
  session->rows = rows;
  session->cols = cols;
  session->socket = open_address(address);

  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(session->socket.fd(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(session->socket.fd(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));

  send_all(session->socket, wire::encode_client_hello(static_cast<std::uint32_t>(cols),
                                                      static_cast<std::uint32_t>(rows)));
  std::uint8_t reply[12];
  try {
    recv_exact(session->socket, reply, "handshake");
  } catch (const TransportError& e) {
    throw TransportError(TransportErrc::handshake_failed, e.what());
  }
  if (std::memcmp(reply, wire::kMagic, 4) != 0) {
    fail(TransportErrc::handshake_failed, "server handshake magic mismatch");
  }
  session->sigma_min = wire::get_f32(std::span<const std::uint8_t, 4>(reply + 4, 4));
  session->sigma_max = wire::get_f32(std::span<const std::uint8_t, 4>(reply + 8, 4));
  if (!(session->sigma_min > 0.0) || !(session->sigma_max > session->sigma_min) ||
      !std::isfinite(session->sigma_max)) {
    fail(TransportErrc::handshake_failed, "server advertised an invalid sigma range");
  }
  return RemoteScore(std::move(session));
}

const std::string& RemoteScore::address() const noexcept { return session_->address; }
std::size_t RemoteScore::rows() const noexcept { return session_->rows; }
std::size_t RemoteScore::cols() const noexcept { return session_->cols; }
double RemoteScore::advertised_sigma_min() const noexcept { return session_->sigma_min; }
double RemoteScore::advertised_sigma_max() const noexcept { return session_->sigma_max; }

bool RemoteScore::covers(double sigma) const noexcept {
  return sigma >= session_->sigma_min * (1.0 - kBoundsSlack) &&
         sigma <= session_->sigma_max * (1.0 + kBoundsSlack);
}

bool RemoteScore::covers(const NoiseSchedule& schedule) const noexcept {
  return covers(schedule.sigma_min()) && covers(schedule.sigma_max());
}

ScoreField RemoteScore::score(const Image& x, double sigma) const {
  Session& s = *session_;
  if (x.rows() != s.rows || x.cols() != s.cols) {
    fail(TransportErrc::shape_mismatch,
         "image " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
             " does not match negotiated " + std::to_string(s.rows) + "x" +
             std::to_string(s.cols));
  }
  if (!covers(sigma)) {
    fail(TransportErrc::sigma_out_of_range,
         "sigma " + std::to_string(sigma) + " outside advertised [" +
             std::to_string(s.sigma_min) + ", " + std::to_string(s.sigma_max) + "]");
  }
  std::lock_guard lock(s.in_flight);
  if (s.socket.fd() < 0) fail(TransportErrc::io_failed, "session closed after earlier failure");
  try {
    send_all(s.socket, wire::encode_request(static_cast<float>(sigma), x));
    std::uint8_t tag = 0;
    recv_exact(s.socket, std::span<std::uint8_t>(&tag, 1), "response tag");
    if (tag == wire::kTagError) {
      std::uint8_t code[4];
      recv_exact(s.socket, code, "error frame");
      const std::uint32_t c = wire::get_u32(code);
      throw TransportError(TransportErrc::server_error,
                           "score server returned error code " + std::to_string(c), c);
    }
    if (tag != wire::kTagResponse) {
      fail(TransportErrc::malformed_frame, "unexpected response tag " + std::to_string(tag));
    }
    std::vector<std::uint8_t> payload(4 * x.size());
    recv_exact(s.socket, payload, "response payload");
    ScoreField out(x.rows(), x.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = wire::get_f32(std::span<const std::uint8_t, 4>(payload.data() + 4 * i, 4));
    }
    if (!all_finite(out)) fail(TransportErrc::malformed_frame, "non-finite score payload");
    return out;
  } catch (const TransportError& e) {
    // The stream position is unknown after a framing fault; drop the connection.
    if (e.code() != TransportErrc::server_error) s.socket.reset();
    throw;
  }
}

std::unique_ptr<RemoteScore> connect_remote_score(const std::string& address, std::size_t rows,
                                                  std::size_t cols,
                                                  const NoiseSchedule& schedule) {
  auto client = std::make_unique<RemoteScore>(RemoteScore::connect(address, rows, cols));
  if (!client->covers(schedule)) {
    throw TransportError(TransportErrc::sigma_out_of_range,
                         "score server range [" + std::to_string(client->advertised_sigma_min()) +
                             ", " + std::to_string(client->advertised_sigma_max()) +
                             "] does not cover the schedule");
  }
  return client;
}

}  // namespace r2d2
