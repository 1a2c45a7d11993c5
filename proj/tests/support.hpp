#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "phishguard/ingest.hpp"
#include "phishguard/sparse.hpp"

namespace pgtest {

inline std::filesystem::path fixtures() { return PG_FIXTURES_DIR; }
inline std::filesystem::path data_dir() { return PG_DATA_DIR; }

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& s)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << s;
}

// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path()
            / ("pgtest-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline phishguard::SparseVector dense_to_sparse(const std::vector<double>& v)
{
    phishguard::SparseVector s;
    s.dim = v.size();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0) {
            s.indices.push_back(static_cast<std::uint32_t>(i));
            s.values.push_back(v[i]);
        }
    }
    return s;
}

inline std::string separable_dataset()
{
    return (fixtures() / "separable.csv").string() + ":" + (fixtures() / "separable.schema.json").string();
}

// Disjoint per-class word pools; `words` tokens per document.
inline std::vector<phishguard::RawEmail> synthetic_corpus(std::size_t per_class, std::size_t words, std::uint64_t seed,
                                                          std::size_t pool = 400)
{
    std::mt19937_64 rng(seed);
    std::vector<phishguard::RawEmail> out;
    for (int c = 0; c < 2; ++c) {
        for (std::size_t d = 0; d < per_class; ++d) {
            std::string text;
            for (std::size_t w = 0; w < words; ++w) {
                const auto k = rng() % pool;
                std::string word(1, c == 0 ? 'l' : 'p');
                // letters only: encode k in base 26
                auto n = k;
                do {
                    word.push_back(static_cast<char>('a' + n % 26));
                    n /= 26;
                } while (n > 0);
                word += "x";
                if (!text.empty()) text.push_back(' ');
                text += word;
            }
            out.push_back({text, c == 0 ? phishguard::ClassLabel::Legitimate : phishguard::ClassLabel::Phishing,
                           "synthetic"});
        }
    }
    return out;
}

}  // namespace pgtest
