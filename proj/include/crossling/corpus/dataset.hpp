/// @file dataset.hpp
/// @brief Question/answer records and their JSONL/CSV wire format.
///
/// Both formats carry the keys id, dataset, language, question, answer and
/// polarity. polarity is optional on input (defaults to unlabeled). Rows that
/// share a question text form one question group; explicit negatives are
/// expressed as additional rows with polarity "negative".

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace crossling::corpus {

enum class DatasetName { HealthQA, LiveQA, MedicationQA, Custom };
enum class Polarity { Positive, Negative, Unlabeled };
enum class DatasetFormat { Jsonl, Csv };

std::string_view to_string(DatasetName d) noexcept;
std::string_view to_string(Polarity p) noexcept;
DatasetName parse_dataset_name(std::string_view s);
Polarity parse_polarity(std::string_view s);
DatasetFormat format_from_path(const std::filesystem::path& path);

struct QAPair {
    std::string id;
    DatasetName dataset = DatasetName::Custom;
    std::string language;
    std::string question;
    std::string answer;
    Polarity polarity = Polarity::Unlabeled;

    bool operator==(const QAPair&) const = default;
};

using Dataset = std::vector<QAPair>;

/// Throws MissingField, DuplicateId or EmptyText naming the 1-based row.
Dataset parse_dataset(std::string_view contents, DatasetFormat format);
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
Dataset load_dataset(const std::filesystem::path& path);

std::string serialize_dataset(const Dataset& dataset, DatasetFormat format);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path, DatasetFormat format);

/// SHA-256 over the canonical JSONL serialization.
std::string dataset_checksum(const Dataset& dataset);

}  // namespace crossling::corpus
