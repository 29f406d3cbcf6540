#include "crossling/corpus/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>
#include <tuple>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "crossling/common/csv.hpp"
#include "crossling/common/error.hpp"
#include "crossling/common/text.hpp"

namespace crossling::corpus {

using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kColumns{"id", "dataset", "language", "question", "answer", "polarity"};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// Field lookup shared by both formats: returns nullptr when absent.
using Getter = std::function<const std::string*(std::string_view)>;

QAPair build_row(const Getter& get, std::size_t row) {
    const auto required = [&](std::string_view key) -> const std::string& {
        const std::string* v = get(key);
        if (!v) throw Error(ErrorKind::MissingField, "row " + std::to_string(row) + " lacks '" + std::string(key) + "'");
        return *v;
    };
    QAPair p;
    p.id = std::string(trim(required("id")));
    if (p.id.empty()) throw Error(ErrorKind::MissingField, "row " + std::to_string(row) + " has an empty id");
    p.dataset = parse_dataset_name(required("dataset"));
    p.language = std::string(trim(required("language")));
    if (p.language.empty()) throw Error(ErrorKind::MissingField, "row " + std::to_string(row) + " has no language");
    p.question = required("question");
    p.answer = required("answer");
    if (trim(p.question).empty() || trim(p.answer).empty()) {
        throw Error(ErrorKind::EmptyText, "row " + std::to_string(row) + " has blank question or answer");
    }
    if (const std::string* pol = get("polarity"); pol && !trim(*pol).empty()) p.polarity = parse_polarity(*pol);
    return p;
}

void check_unique(const Dataset& d) {
    std::set<std::tuple<DatasetName, std::string, std::string>> seen;
    for (const auto& p : d) {
        if (!seen.emplace(p.dataset, p.language, p.id).second) throw Error(ErrorKind::DuplicateId, p.id);
    }
}

}  // namespace

std::string_view to_string(DatasetName d) noexcept {
    switch (d) {
        case DatasetName::HealthQA: return "HealthQA";
        case DatasetName::LiveQA: return "LiveQA";
        case DatasetName::MedicationQA: return "MedicationQA";
        case DatasetName::Custom: return "Custom";
    }
    return "Custom";
}

std::string_view to_string(Polarity p) noexcept {
    switch (p) {
        case Polarity::Positive: return "positive";
        case Polarity::Negative: return "negative";
        case Polarity::Unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

DatasetName parse_dataset_name(std::string_view s) {
    const auto l = lower(trim(s));
    if (l == "healthqa") return DatasetName::HealthQA;
    if (l == "liveqa") return DatasetName::LiveQA;
    if (l == "medicationqa") return DatasetName::MedicationQA;
    if (l == "custom") return DatasetName::Custom;
    throw Error(ErrorKind::ParseError, "unknown dataset '" + std::string(s) + "'");
}

Polarity parse_polarity(std::string_view s) {
    const auto l = lower(trim(s));
    if (l == "positive" || l == "pos" || l == "1") return Polarity::Positive;
    if (l == "negative" || l == "neg" || l == "0") return Polarity::Negative;
    if (l == "unlabeled" || l.empty()) return Polarity::Unlabeled;
    throw Error(ErrorKind::ParseError, "unknown polarity '" + std::string(s) + "'");
}

DatasetFormat format_from_path(const std::filesystem::path& path) {
    const auto ext = lower(path.extension().string());
    if (ext == ".csv") return DatasetFormat::Csv;
    if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return DatasetFormat::Jsonl;
    throw Error(ErrorKind::ParseError, "cannot infer dataset format from " + path.string());
}

Dataset parse_dataset(std::string_view contents, DatasetFormat format) {
    Dataset out;
    if (format == DatasetFormat::Jsonl) {
        std::size_t row = 0;
        for (auto line : split_lines(contents)) {
            ++row;
            if (trim(line).empty()) continue;
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::parse_error& e) {
                throw Error(ErrorKind::ParseError, "row " + std::to_string(row) + ": " + e.what());
            }
            std::map<std::string, std::string, std::less<>> fields;
            for (auto it = obj.begin(); it != obj.end(); ++it) {
                if (it.value().is_string()) fields[it.key()] = it.value().get<std::string>();
                else if (!it.value().is_null()) fields[it.key()] = it.value().dump();
            }
            out.push_back(build_row(
                [&](std::string_view k) -> const std::string* {
                    auto it = fields.find(k);
                    return it == fields.end() ? nullptr : &it->second;
                },
                row));
        }
    } else {
        const auto rows = csv::parse(contents);
        if (!rows.empty()) {
            const auto& header = rows.front();
            for (std::size_t r = 1; r < rows.size(); ++r) {
                const auto& cells = rows[r];
                out.push_back(build_row(
                    [&](std::string_view k) -> const std::string* {
                        for (std::size_t c = 0; c < header.size(); ++c) {
                            if (trim(header[c]) == k) return c < cells.size() ? &cells[c] : nullptr;
                        }
                        return nullptr;
                    },
                    r));
            }
        }
    }
    check_unique(out);
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
    auto d = parse_dataset(read_file(path), format);
    spdlog::info("loaded {} rows from {}", d.size(), path.string());
    return d;
}

Dataset load_dataset(const std::filesystem::path& path) { return load_dataset(path, format_from_path(path)); }

std::string serialize_dataset(const Dataset& dataset, DatasetFormat format) {
    std::string out;
    if (format == DatasetFormat::Jsonl) {
        for (const auto& p : dataset) {
            json obj = json::object();
            obj["id"] = p.id;
            obj["dataset"] = to_string(p.dataset);
            obj["language"] = p.language;
            obj["question"] = p.question;
            obj["answer"] = p.answer;
            obj["polarity"] = to_string(p.polarity);
            out += obj.dump();
            out += '\n';
        }
        return out;
    }
    out += csv::format_row({kColumns.begin(), kColumns.end()});
    for (const auto& p : dataset) {
        out += csv::format_row({p.id, std::string(to_string(p.dataset)), p.language, p.question, p.answer,
                                std::string(to_string(p.polarity))});
    }
    return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path, DatasetFormat format) {
    write_file(path, serialize_dataset(dataset, format));
}

std::string dataset_checksum(const Dataset& dataset) {
    return sha256_hex(serialize_dataset(dataset, DatasetFormat::Jsonl));
}

}  // namespace crossling::corpus
