#include "abba/link/transport.hpp"

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <fmt/format.h>

namespace abba::link {

namespace {

struct Pipe {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::string> chunks;
    bool closed = false;
};

class MemoryChannel : public Channel {
public:
    MemoryChannel(std::shared_ptr<Pipe> in, std::shared_ptr<Pipe> out) : in_(std::move(in)), out_(std::move(out)) {}
    ~MemoryChannel() override { close(); }

    void write(std::string_view bytes) override {
        std::lock_guard lock(out_->mu);
        if (out_->closed) throw LinkError("write on a closed channel");
        out_->chunks.emplace_back(bytes);
        out_->cv.notify_all();
    }

    ReadResult read(std::chrono::milliseconds timeout) override {
        std::unique_lock lock(in_->mu);
        in_->cv.wait_for(lock, timeout, [&] { return !in_->chunks.empty() || in_->closed; });
        ReadResult r;
        if (!in_->chunks.empty()) {
            r.status = ReadResult::Status::Data;
            while (!in_->chunks.empty()) {
                r.bytes += in_->chunks.front();
                in_->chunks.pop_front();
            }
        } else if (in_->closed) {
            r.status = ReadResult::Status::Closed;
        }
        return r;
    }

    void close() override {
        for (auto* p : {in_.get(), out_.get()}) {
            std::lock_guard lock(p->mu);
            p->closed = true;
            p->cv.notify_all();
        }
    }

private:
    std::shared_ptr<Pipe> in_;
    std::shared_ptr<Pipe> out_;
};

class SocketChannel : public Channel {
public:
    explicit SocketChannel(int fd) : fd_(fd) {}
    ~SocketChannel() override {
        if (fd_ >= 0) ::close(fd_);
    }

    void write(std::string_view bytes) override {
        std::lock_guard lock(write_mu_);
        if (fd_ < 0) throw LinkError("write on a closed socket");
        while (!bytes.empty()) {
            const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw LinkError(fmt::format("socket write failed: {}", std::strerror(errno)));
            }
            bytes.remove_prefix(static_cast<std::size_t>(n));
        }
    }

    ReadResult read(std::chrono::milliseconds timeout) override {
        ReadResult r;
        if (fd_ < 0) {
            r.status = ReadResult::Status::Closed;
            return r;
        }
        pollfd p{fd_, POLLIN, 0};
        const int ready = ::poll(&p, 1, static_cast<int>(timeout.count()));
        if (ready < 0 && errno != EINTR) throw LinkError(fmt::format("poll failed: {}", std::strerror(errno)));
        if (ready <= 0) return r;
        char buf[4096];
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n == 0) {
            r.status = ReadResult::Status::Closed;
        } else if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) return r;
            r.status = ReadResult::Status::Closed;
        } else {
            r.status = ReadResult::Status::Data;
            r.bytes.assign(buf, static_cast<std::size_t>(n));
        }
        return r;
    }

    void close() override {
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
    }

private:
    int fd_;
    std::mutex write_mu_;
};

sockaddr_un unix_address(const std::string& path) {
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path.empty() || path.size() >= sizeof addr.sun_path) {
        throw LinkError(fmt::format("invalid AF_UNIX address '{}'", path));
    }
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    return addr;
}

}  // namespace

ChannelPair memory_pair() {
    auto ab = std::make_shared<Pipe>();
    auto ba = std::make_shared<Pipe>();
    return {std::make_unique<MemoryChannel>(ba, ab), std::make_unique<MemoryChannel>(ab, ba)};
}

ChannelPair socket_pair() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
        throw LinkError(fmt::format("socketpair failed: {}", std::strerror(errno)));
    }
    return {std::make_unique<SocketChannel>(fds[0]), std::make_unique<SocketChannel>(fds[1])};
}

std::unique_ptr<Channel> accept_unix(const std::string& path, std::chrono::milliseconds timeout) {
    const sockaddr_un addr = unix_address(path);
    const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd < 0) throw LinkError(fmt::format("socket failed: {}", std::strerror(errno)));
    ::unlink(path.c_str());
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 1) != 0) {
        const std::string err = std::strerror(errno);
        ::close(fd);
        throw LinkError(fmt::format("cannot listen on '{}': {}", path, err));
    }
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(timeout.count()));
    int conn = -1;
    if (ready > 0) conn = ::accept(fd, nullptr, nullptr);
    ::close(fd);
    ::unlink(path.c_str());
    if (conn < 0) throw LinkError(fmt::format("no connection on '{}'", path));
    return std::make_unique<SocketChannel>(conn);
}

std::unique_ptr<Channel> connect_unix(const std::string& path, std::chrono::milliseconds timeout) {
    const sockaddr_un addr = unix_address(path);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
        const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
        if (fd < 0) throw LinkError(fmt::format("socket failed: {}", std::strerror(errno)));
        if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
            return std::make_unique<SocketChannel>(fd);
        }
        const std::string err = std::strerror(errno);
        ::close(fd);
        if (std::chrono::steady_clock::now() >= deadline) {
            throw LinkError(fmt::format("cannot connect to '{}': {}", path, err));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
}

FaultInjector::FaultInjector(double drop_rate, double duplicate_rate, std::uint64_t seed)
    : drop_(drop_rate), duplicate_(duplicate_rate), rng_(seed) {
    if (!(drop_rate >= 0.0 && drop_rate < 1.0) || !(duplicate_rate >= 0.0 && duplicate_rate < 1.0) ||
        drop_rate + duplicate_rate >= 1.0) {
        throw std::invalid_argument("fault rates must lie in [0, 1) and sum below 1");
    }
}

FaultInjector FaultInjector::scripted(std::vector<Action> script) {
    FaultInjector f(0.0, 0.0, 0);
    f.script_ = std::move(script);
    f.scripted_ = true;
    return f;
}

FaultInjector::Action FaultInjector::next() {
    if (scripted_) {
        return cursor_ < script_.size() ? script_[cursor_++] : Action::Deliver;
    }
    const double u = rng_.uniform();
    if (u < drop_) return Action::Drop;
    if (u < drop_ + duplicate_) return Action::Duplicate;
    return Action::Deliver;
}

FaultyChannel::FaultyChannel(std::unique_ptr<Channel> inner, FaultInjector faults)
    : inner_(std::move(inner)), faults_(std::move(faults)) {}

void FaultyChannel::write(std::string_view bytes) {
    switch (faults_.next()) {
        case FaultInjector::Action::Drop:
            ++dropped_;
            return;
        case FaultInjector::Action::Duplicate:
            ++duplicated_;
            inner_->write(bytes);
            inner_->write(bytes);
            return;
        case FaultInjector::Action::Deliver:
            inner_->write(bytes);
            return;
    }
}

ReadResult FaultyChannel::read(std::chrono::milliseconds timeout) { return inner_->read(timeout); }

void FaultyChannel::close() { inner_->close(); }

LinkPeer::LinkPeer(Endpoint endpoint, Channel& channel) : endpoint_(std::move(endpoint)), channel_(channel) {}

Message LinkPeer::post(Payload payload) {
    Message m = endpoint_.emit(std::move(payload));
    transmit(m);
    return m;
}

void LinkPeer::transmit(const Message& msg) { channel_.write(encode(msg)); }

void LinkPeer::request_sync() { transmit(endpoint_.sync_request()); }

std::vector<Message> LinkPeer::poll(std::chrono::milliseconds timeout) {
    std::vector<Message> received;
    const ReadResult r = channel_.read(timeout);
    if (r.status == ReadResult::Status::Closed) {
        closed_ = true;
        return received;
    }
    if (r.status == ReadResult::Status::Timeout) return received;
    decoder_.feed(r.bytes);
    while (true) {
        DecodeResult d = decoder_.next();
        if (d.status == DecodeStatus::NeedMore) break;
        if (d.status == DecodeStatus::Corrupt) {
            diagnostics_.push_back(d.diagnostic);
            continue;
        }
        const Message& msg = *d.message;
        const Receipt receipt = endpoint_.receive(msg);
        if (receipt.outcome == Receipt::Outcome::SyncApplied) {
            ++syncs_applied_;
            last_response_ = std::get<SyncResponse>(msg.payload);
        }
        if (receipt.outcome == Receipt::Outcome::SyncRejected) diagnostics_.push_back("sync response rejected");
        for (const Message& reply : receipt.replies) transmit(reply);
        if (on_message) on_message(*this, msg, receipt);
        received.push_back(std::move(*d.message));
    }
    return received;
}

void settle(LinkPeer& a, LinkPeer& b, std::size_t max_iterations) {
    for (std::size_t i = 0; i < max_iterations; ++i) {
        const bool quiet_a = a.poll(std::chrono::milliseconds(0)).empty();
        const bool quiet_b = b.poll(std::chrono::milliseconds(0)).empty();
        if (quiet_a && quiet_b) return;
    }
    throw LinkError("settle: traffic did not die down");
}

}  // namespace abba::link
