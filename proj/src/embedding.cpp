#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "chartnl/diversity.hpp"

#include "chartnl/errors.hpp"
#include "chartnl/json_tree.hpp"
#include "chartnl/rng.hpp"
#include "chartnl/text_util.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

namespace chartnl {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    for (unsigned char c : text) {
        if (is_word_char(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ == 0) throw ZeroDimensionError("hash embedder dimension is 0");
}

std::string HashEmbedder::name() const { return "hash" + std::to_string(dim_); }

VectorSet HashEmbedder::embed(const std::vector<std::string>& texts) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(texts.size()), static_cast<Eigen::Index>(dim_));
    auto add = [&](Eigen::Index row, std::string_view feature, double weight) {
        const std::uint64_t h = derive_seed(fnv1a(feature), seed_);
        const auto col = static_cast<Eigen::Index>(h % dim_);
        m(row, col) += (h >> 63) ? -weight : weight;
    };
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        add(row, "\x01bias", 0.25);
        for (const auto& w : words_of(texts[i])) {
            add(row, "w:" + w, 1.0);
            const std::string padded = " " + w + " ";
            for (std::size_t k = 0; k + 3 <= padded.size(); ++k) add(row, "t:" + padded.substr(k, 3), 0.5);
        }
    }
    return VectorSet(std::move(m));
}

VectorSet parse_vector_file(std::string_view text) {
    const auto lines = split_lines(text);
    std::size_t first = 0;
    while (first < lines.size() && trim(lines[first]).empty()) ++first;
    if (first == lines.size()) throw ParseError(0, "vector file has no dim= header");
    std::string_view header = trim(lines[first]);
    if (!header.starts_with("dim=")) throw ParseError(0, "vector file must start with dim=<d>");
    std::size_t dim = 0;
    auto digits = header.substr(4);
    if (std::from_chars(digits.data(), digits.data() + digits.size(), dim).ec != std::errc() || dim == 0)
        throw ZeroDimensionError("vector file declares dimension " + std::string(digits));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        std::string_view line = trim(lines[i]);
        if (line.empty()) continue;
        std::vector<double> v;
        for (auto tok : split(line, ' ')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            double x = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
            if (ec != std::errc() || ptr != tok.data() + tok.size())
                throw ParseError(i, "bad number \"" + std::string(tok) + "\" on line " + std::to_string(i + 1));
            v.push_back(x);
        }
        if (v.size() != dim)
            throw DimensionMismatchError("line " + std::to_string(i + 1) + " has " + std::to_string(v.size()) +
                                         " values, expected " + std::to_string(dim));
        rows.push_back(std::move(v));
    }
    if (rows.empty()) return VectorSet(Eigen::MatrixXd(0, static_cast<Eigen::Index>(dim)));
    return VectorSet::from_rows(rows);
}

std::string format_vector_file(const VectorSet& v) {
    std::string out = "dim=" + std::to_string(v.dim()) + "\n";
    for (Eigen::Index i = 0; i < v.points().rows(); ++i) {
        for (Eigen::Index j = 0; j < v.points().cols(); ++j) {
            if (j) out.push_back(' ');
            out += format_double(v.points()(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

FileEmbedder::FileEmbedder(const std::string& vectors_path, const std::string& texts_path) : label_("file") {
    load(read_file(vectors_path), read_file(texts_path));
}

FileEmbedder::FileEmbedder(std::string_view vectors_text, std::string_view texts_text, std::string label)
    : label_(std::move(label)) {
    load(vectors_text, texts_text);
}

void FileEmbedder::load(std::string_view vectors_text, std::string_view texts_text) {
    VectorSet v = parse_vector_file(vectors_text);
    std::vector<std::string> texts;
    for (auto line : split_lines(texts_text))
        if (!trim(line).empty()) texts.emplace_back(trim(line));
    if (texts.size() != v.size())
        throw ProviderError("vector file has " + std::to_string(v.size()) + " vectors but the text file has " +
                            std::to_string(texts.size()) + " lines");
    dim_ = v.dim();
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const Eigen::RowVectorXd row = v.points().row(static_cast<Eigen::Index>(i));
        entries_.emplace_back(texts[i], std::vector<double>(row.data(), row.data() + row.size()));
    }
}

VectorSet FileEmbedder::embed(const std::vector<std::string>& texts) {
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < entries_.size(); ++i) index.emplace(entries_[i].first, i);
    std::vector<std::vector<double>> rows;
    for (const auto& t : texts) {
        auto it = index.find(trim(t));
        if (it == index.end()) throw ProviderError("no precomputed vector for \"" + t + "\"");
        rows.push_back(entries_[it->second].second);
    }
    if (rows.empty()) return VectorSet(Eigen::MatrixXd(0, static_cast<Eigen::Index>(dim_)));
    return VectorSet::from_rows(rows);
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint_url, std::string model, std::string api_key_env,
                               std::size_t batch_size, double timeout_seconds)
    : endpoint_url_(std::move(endpoint_url)),
      model_(std::move(model)),
      api_key_env_(std::move(api_key_env)),
      batch_size_(batch_size == 0 ? 1 : batch_size),
      timeout_seconds_(timeout_seconds) {}

VectorSet RemoteEmbedder::embed(const std::vector<std::string>& texts) {
    const char* key = std::getenv(api_key_env_.c_str());
    if (key == nullptr || *key == '\0') throw AuthError("environment variable " + api_key_env_ + " is not set");
    auto scheme = endpoint_url_.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + endpoint_url_);
    auto slash = endpoint_url_.find('/', scheme + 3);
    std::string prefix = slash == std::string::npos ? "" : endpoint_url_.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    httplib::Client client(endpoint_url_.substr(0, slash));
    const auto secs = static_cast<time_t>(timeout_seconds_);
    client.set_connection_timeout(secs);
    client.set_read_timeout(secs);
    const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

    std::vector<std::vector<double>> rows;
    for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
        const std::size_t end = std::min(texts.size(), start + batch_size_);
        nlohmann::json body;
        body["model"] = model_;
        body["input"] = std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                                 texts.begin() + static_cast<std::ptrdiff_t>(end));
        auto res = client.Post(prefix + "/v1/embeddings", headers, body.dump(), "application/json");
        if (!res) throw ProviderError("embedding request failed: " + httplib::to_string(res.error()));
        if (res->status == 401 || res->status == 403) throw AuthError("embedding endpoint rejected the credentials");
        if (res->status != 200) throw ProviderError("embedding endpoint returned HTTP " + std::to_string(res->status));
        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("data") || !j["data"].is_array() || j["data"].size() != end - start)
            throw MalformedResponseError("embedding response has no data array of the right length");
        std::vector<std::vector<double>> batch(end - start);
        for (std::size_t i = 0; i < j["data"].size(); ++i) {
            const auto& item = j["data"][i];
            std::size_t slot = item.contains("index") && item["index"].is_number_unsigned() ? item["index"].get<std::size_t>() : i;
            if (slot >= batch.size() || !item.contains("embedding") || !item["embedding"].is_array())
                throw MalformedResponseError("embedding item " + std::to_string(i) + " is malformed");
            batch[slot] = item["embedding"].get<std::vector<double>>();
        }
        for (auto& v : batch) rows.push_back(std::move(v));
    }
    if (rows.empty()) throw EmptySetError("nothing to embed");
    return VectorSet::from_rows(rows);
}

}  // namespace chartnl
