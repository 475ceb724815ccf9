#pragma once

// Shared helpers for the unit and acceptance suites.

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sentssl/corpus.hpp"
#include "sentssl/types.hpp"

namespace sentssl::testing {

inline Review make_review(ReviewId id, std::string domain, int stars, std::string title,
                          std::string body = "") {
  return Review{id, std::move(domain), stars, std::move(title), std::move(body)};
}

inline LabeledExample make_example(ReviewId id, SparseVector x, Polarity y,
                                   std::string domain = "d") {
  return LabeledExample{id, std::move(domain), std::move(x), y, Provenance::gold};
}

inline SparseVector vec(std::vector<std::pair<std::uint32_t, double>> pairs) {
  return SparseVector::from_pairs(std::move(pairs));
}

/// Unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sentssl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
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

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// `per_class` positive (5-star) and `per_class` negative (1-star) reviews
/// per domain, ids consecutive from `first_id`.
inline std::vector<Review> polar_reviews(const std::string& domain, std::size_t per_class,
                                         ReviewId first_id = 1) {
  std::vector<Review> out;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool pos = i % 2 == 0;
    out.push_back(make_review(first_id + i, domain, pos ? 5 : 1,
                              pos ? "great item " + std::to_string(i) : "bad item " + std::to_string(i)));
  }
  return out;
}

}  // namespace sentssl::testing
