#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace mpc {

// Minimal result type: holds either a value or an error.
template <typename T, typename E = std::string>
class Result {
public:
    Result(T value) : value_(std::move(value)) {}
    static Result err(E error) {
        Result r;
        r.error_ = std::move(error);
        return r;
    }

    bool ok() const { return value_.has_value(); }
    explicit operator bool() const { return ok(); }

    const T& value() const& {
        if (!value_) throw std::logic_error("Result::value() on error");
        return *value_;
    }
    T&& take() {
        if (!value_) throw std::logic_error("Result::take() on error");
        return std::move(*value_);
    }
    const E& error() const {
        if (value_) throw std::logic_error("Result::error() on ok");
        return *error_;
    }

private:
    Result() = default;
    std::optional<T> value_;
    std::optional<E> error_;
};

// FNV-1a 64-bit, used for content digests and cache keys.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view data);

// Lowercase, spaces and non-alphanumerics collapsed to single dashes.
std::string slugify(std::string_view text);

}  // namespace mpc
