#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "polarimeter/ingest.hpp"

namespace testing {

inline polarimeter::ingest::Tweet tweet(std::string id, std::string user, std::vector<std::string> hashtags = {},
                                        std::vector<std::string> urls = {}) {
    polarimeter::ingest::Tweet t;
    t.tweet_id = std::move(id);
    t.author_id = user;
    t.author_handle = "h" + user;
    t.text = "Kavanaugh";
    t.created_at = 1538092800;  // 2018-09-28T00:00:00Z
    t.hashtags = std::move(hashtags);
    t.urls = std::move(urls);
    return t;
}

inline polarimeter::ingest::Tweet retweet(std::string id, std::string user, std::string original,
                                          std::string original_handle = "source") {
    auto t = tweet(std::move(id), std::move(user));
    t.retweet_of_tweet_id = std::move(original);
    t.retweet_of_user_handle = std::move(original_handle);
    return t;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("polarimeter-" + tag + "-" + std::to_string(rd()));
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

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void spit(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace testing
