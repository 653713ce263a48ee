#include "chartnl/preprocess.hpp"

#include "chartnl/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace chartnl {

std::pair<CsvRow, std::vector<CsvRow>> rows_to_table(const Array& rows) {
    CsvRow header;
    std::map<std::string, std::size_t> column_of;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_object())
            throw HeterogeneousDataError("row " + std::to_string(i) + " is not an object");
        for (const auto& m : rows[i].object()) {
            if (column_of.emplace(m.key, header.size()).second) header.push_back(m.key);
        }
    }
    std::vector<CsvRow> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        CsvRow cells(header.size());
        for (const auto& m : row.object())
            cells[column_of[m.key]] = m.value.is_scalar() ? scalar_text(m.value.scalar()) : to_json(m.value);
        out.push_back(std::move(cells));
    }
    return {std::move(header), std::move(out)};
}

namespace {

class Externalizer {
public:
    Externalizer(const SpecDocument& doc, const std::string& out_dir, const ExternalizeOptions& opts)
        : doc_(doc), out_dir_(out_dir), opts_(opts) {}

    ExternalizedSpec run() {
        ExternalizedSpec result;
        SpecNode root = doc_.root;
        fs::create_directories(out_dir_);

        // Named datasets first so `{"name": ...}` references can be resolved.
        auto& members = root.object();
        for (auto it = members.begin(); it != members.end(); ++it) {
            if (it->key != "datasets" || !it->value.is_object()) continue;
            bool all_written = true;
            for (const auto& ds : it->value.object()) {
                if (!ds.value.is_array()) {
                    result.issues.push_back("HeterogeneousDataError: dataset \"" + ds.key + "\" is not an array");
                    all_written = false;
                    continue;
                }
                try {
                    result.dataset_files[ds.key] = write_table(ds.value.array(), result);
                } catch (const HeterogeneousDataError& e) {
                    result.issues.push_back("HeterogeneousDataError: dataset \"" + ds.key + "\": " + e.what());
                    all_written = false;
                }
            }
            if (all_written) members.erase(it);
            break;
        }
        rewrite(root, result);
        result.doc = SpecDocument{doc_.id, to_json(root), std::move(root), doc_.schema_version};
        return result;
    }

private:
    std::string write_table(const Array& rows, ExternalizedSpec& result) {
        auto [header, cells] = rows_to_table(rows);
        const std::string name = doc_.id + "_data_" + std::to_string(next_index_++) + ".csv";
        const fs::path path = fs::path(out_dir_) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << write_csv(header, cells);
        if (!out) throw IoError("failed writing " + path.string());
        result.data_files.push_back(DataFileInfo{path.string(), cells.size(), header});
        return name;
    }

    static SpecNode url_node(const std::string& url) {
        return SpecNode(Object{Member{"url", SpecNode(Scalar{url})}});
    }

    std::optional<std::string> load_json_reference(std::string_view url) {
        const bool remote = url.starts_with("http://") || url.starts_with("https://") || url.starts_with("//");
        if (remote) {
            if (opts_.fetch_remote && opts_.fetcher) return opts_.fetcher(std::string(url));
            return std::nullopt;
        }
        fs::path p = fs::path(opts_.source_dir.empty() ? "." : opts_.source_dir) / std::string(url);
        std::ifstream in(p, std::ios::binary);
        if (!in) return std::nullopt;
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void rewrite_data(SpecNode& data, ExternalizedSpec& result) {
        if (const SpecNode* values = data.find("values")) {
            if (!values->is_array()) {
                result.issues.push_back("HeterogeneousDataError: inline values are not an array of rows");
                return;
            }
            try {
                data = url_node(write_table(values->array(), result));
            } catch (const HeterogeneousDataError& e) {
                result.issues.push_back(std::string("HeterogeneousDataError: ") + e.what());
            }
            return;
        }
        if (const SpecNode* name = data.find("name"); name && name->is_string()) {
            auto it = result.dataset_files.find(std::string(name->as_string()));
            if (it != result.dataset_files.end()) data = url_node(it->second);
            return;
        }
        if (const SpecNode* url = data.find("url"); url && url->is_string()) {
            std::string_view u = url->as_string();
            if (!u.ends_with(".json")) return;
            auto text = load_json_reference(u);
            if (!text) return;
            try {
                SpecNode rows = parse_json(*text);
                if (!rows.is_array()) return;
                data = url_node(write_table(rows.array(), result));
            } catch (const ParseError& e) {
                result.issues.push_back("ParseError: " + std::string(u) + ": " + e.what());
            } catch (const HeterogeneousDataError& e) {
                result.issues.push_back("HeterogeneousDataError: " + std::string(u) + ": " + e.what());
            }
        }
    }

    void rewrite(SpecNode& node, ExternalizedSpec& result) {
        if (node.is_array()) {
            for (auto& item : node.array()) rewrite(item, result);
            return;
        }
        if (!node.is_object()) return;
        for (auto& m : node.object()) {
            if (m.key == "values" || m.key == "datasets") continue;
            if (m.key == "data" && m.value.is_object()) rewrite_data(m.value, result);
            else rewrite(m.value, result);
        }
    }

    const SpecDocument& doc_;
    std::string out_dir_;
    const ExternalizeOptions& opts_;
    std::size_t next_index_ = 0;
};

}  // namespace

ExternalizedSpec externalize_data(const SpecDocument& doc, const std::string& out_dir, const ExternalizeOptions& opts) {
    try {
        return Externalizer(doc, out_dir, opts).run();
    } catch (const fs::filesystem_error& e) {
        throw IoError(e.what());
    }
}

std::string minify_spec(const SpecDocument& doc) { return to_json(doc.root); }

}  // namespace chartnl
