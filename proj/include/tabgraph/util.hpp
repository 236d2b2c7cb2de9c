#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace tabgraph {

inline constexpr std::string_view kVersion = "0.1.0";

/// Shortest decimal representation that round-trips the double exactly.
inline std::string fmt_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

inline bool parse_double(std::string_view s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (last[-1] == ' ' || last[-1] == '\t')) --last;
    if (first == last) return false;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// FNV-1a 64-bit, used for artifact hashes in run manifests.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[std::size_t(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

/// Runs fn(i) for i in [0, n). Work is split into fixed-size blocks so results
/// assembled per index never depend on the thread count.
inline void parallel_for(std::size_t n, int n_threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (n_threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mtx;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mtx);
                if (next >= n) return;
                i = next++;
            }
            fn(i);
        }
    };
    const int use = int(std::min<std::size_t>(std::size_t(n_threads), n));
    pool.reserve(std::size_t(use));
    for (int t = 0; t < use; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace tabgraph
