// Copyright 2026 The somebridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOMEBRIDGE_NET_UDP_SOCKET_HPP
#define SOMEBRIDGE_NET_UDP_SOCKET_HPP

#include <cerrno>
#include <cstring>
#include <optional>
#include <utility>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include "somebridge/bytes.hpp"
#include "somebridge/clock.hpp"
#include "somebridge/core.hpp"
#include "somebridge/net/endpoint.hpp"

namespace somebridge::net {

/// Move-only RAII wrapper around an IPv4 UDP socket. All addressing uses the
/// host-order `endpoint` type; conversion happens at the syscall boundary.
class udp_socket {
public:
    udp_socket() = default;
    udp_socket(const udp_socket&) = delete;
    udp_socket& operator=(const udp_socket&) = delete;
    udp_socket(udp_socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    udp_socket& operator=(udp_socket&& o) noexcept {
        if (this != &o) {
            close();
            fd_ = std::exchange(o.fd_, -1);
        }
        return *this;
    }
    ~udp_socket() { close(); }

    /// Unbound socket for sending; the kernel picks a source port on first use.
    static result<udp_socket> open() {
        int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (fd < 0) return error{errc::io_error, std::string("socket: ") + std::strerror(errno)};
        udp_socket s;
        s.fd_ = fd;
        return s;
    }

    /// Bound socket; port 0 asks the kernel for a free port.
    static result<udp_socket> bind(endpoint local) {
        auto sock = open();
        if (!sock) return sock;
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(local.ipv4);
        addr.sin_port = htons(local.port);
        if (::bind(sock->fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            errc code = errno == EADDRINUSE ? errc::port_in_use : errc::io_error;
            return error{code, "bind " + local.to_string() + ": " + std::strerror(errno)};
        }
        return sock;
    }

    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }

    void close() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    result<endpoint> local_endpoint() const {
        sockaddr_in addr{};
        socklen_t len = sizeof addr;
        if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
            return error{errc::io_error, std::string("getsockname: ") + std::strerror(errno)};
        return endpoint{ntohl(addr.sin_addr.s_addr), ntohs(addr.sin_port)};
    }

    result<void> set_recv_timeout(duration_ns timeout) {
        timeval tv{};
        tv.tv_sec = static_cast<time_t>(timeout / seconds(1));
        tv.tv_usec = static_cast<suseconds_t>((timeout % seconds(1)) / us(1));
        if (::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv) != 0)
            return {errc::io_error, std::string("SO_RCVTIMEO: ") + std::strerror(errno)};
        return {};
    }

    result<void> set_buffer_sizes(int bytes) {
        // best effort: the kernel clamps to its rmem/wmem limits
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &bytes, sizeof bytes);
        ::setsockopt(fd_, SOL_SOCKET, SO_SNDBUF, &bytes, sizeof bytes);
        return {};
    }

    result<std::size_t> send_to(byte_span data, endpoint dest) {
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(dest.ipv4);
        addr.sin_port = htons(dest.port);
        ssize_t n = ::sendto(fd_, data.data(), data.size(), 0,
                             reinterpret_cast<sockaddr*>(&addr), sizeof addr);
        if (n < 0)
            return error{errc::io_error,
                         "sendto " + dest.to_string() + ": " + std::strerror(errno)};
        return static_cast<std::size_t>(n);
    }

    struct datagram {
        std::size_t size = 0;
        endpoint source;
    };

    /// Receives into the caller's buffer. Returns nullopt on timeout so poll
    /// loops can check their stop flags.
    result<std::optional<datagram>> recv_from(byte_vec& buf) {
        sockaddr_in addr{};
        socklen_t alen = sizeof addr;
        ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0,
                               reinterpret_cast<sockaddr*>(&addr), &alen);
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)
                return std::optional<datagram>{};
            return error{errc::io_error, std::string("recvfrom: ") + std::strerror(errno)};
        }
        return std::optional<datagram>{
            datagram{static_cast<std::size_t>(n),
                     endpoint{ntohl(addr.sin_addr.s_addr), ntohs(addr.sin_port)}}};
    }

private:
    int fd_ = -1;
};

} // namespace somebridge::net

#endif // SOMEBRIDGE_NET_UDP_SOCKET_HPP
