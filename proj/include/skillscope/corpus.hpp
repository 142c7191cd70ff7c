#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "skillscope/common.hpp"
#include "skillscope/csv.hpp"

#include <json.hpp>

namespace skillscope {

enum class CourseType { Program, Core, Elective, CoreOrElective };

inline const char* to_string(CourseType t) {
    switch (t) {
        case CourseType::Program: return "program";
        case CourseType::Core: return "core";
        case CourseType::Elective: return "elective";
        case CourseType::CoreOrElective: return "core_or_elective";
    }
    return "core_or_elective";
}

// Case-insensitive; separators ignored, so "Core or Elective", "core_or_elective"
// and "CoreOrElective" all normalize the same way. Unknown strings are reported
// to the caller, which downgrades them to CoreOrElective with a warning.
inline std::optional<CourseType> parse_course_type(const std::string& raw) {
    std::string key;
    for (char c : raw) {
        if (std::isalpha(static_cast<unsigned char>(c)))
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (key == "program" || key == "programme") return CourseType::Program;
    if (key == "core" || key == "corecourse") return CourseType::Core;
    if (key == "elective") return CourseType::Elective;
    if (key == "coreorelective") return CourseType::CoreOrElective;
    return std::nullopt;
}

struct Document {
    std::string id;
    std::string institution;
    std::string program;
    CourseType course_type = CourseType::CoreOrElective;
    std::string text;
};

enum class CorpusFormat { Csv, Jsonl };

struct DocumentSet {
    std::vector<Document> documents;   // file order
    std::string source_path;
    CorpusFormat source_format = CorpusFormat::Csv;

    std::size_t size() const { return documents.size(); }
};

struct ReadResult {
    DocumentSet set;
    std::vector<Warning> warnings;  // e.g. unknown course_type downgrades
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline Document make_document(std::vector<std::string>&& fields, std::size_t record_index,
                              std::vector<Warning>& warnings) {
    Document doc;
    doc.id = std::move(fields[0]);
    doc.institution = std::move(fields[1]);
    doc.program = std::move(fields[2]);
    doc.text = std::move(fields[4]);
    if (doc.id.empty())
        throw DataError("record " + std::to_string(record_index) + ": empty id");
    if (trim(doc.text).empty())
        throw DataError("record " + std::to_string(record_index) + " (id '" + doc.id + "'): empty text");
    auto ct = parse_course_type(fields[3]);
    if (ct) {
        doc.course_type = *ct;
    } else {
        doc.course_type = CourseType::CoreOrElective;
        warnings.push_back({record_index, "unknown course_type '" + fields[3] +
                                              "' for id '" + doc.id + "', treated as core_or_elective"});
    }
    return doc;
}

}  // namespace detail

static constexpr const char* kCorpusCsvHeader = "id,institution,program,course_type,text";

/// Reads a document collection from a CSV (RFC 4180, header row required) or
/// JSONL file. Record order is preserved; duplicate or missing ids reject the
/// whole file.
inline ReadResult read_documents(const std::string& path, CorpusFormat format) {
    ReadResult result;
    result.set.source_path = path;
    result.set.source_format = format;
    std::string raw = csv::read_file(path);
    if (detail::trim(raw).empty()) throw DataError("empty corpus file: " + path);

    std::unordered_set<std::string> seen_ids;
    std::size_t record_index = 0;

    auto add = [&](Document&& doc) {
        if (!seen_ids.insert(doc.id).second)
            throw DataError("record " + std::to_string(record_index) + ": duplicate id '" + doc.id + "'");
        result.set.documents.push_back(std::move(doc));
    };

    if (format == CorpusFormat::Csv) {
        auto records = csv::parse(raw);
        if (records.empty()) throw DataError("empty corpus file: " + path);
        const auto& header = records[0].fields;
        std::vector<std::string> expected = {"id", "institution", "program", "course_type", "text"};
        if (header != expected)
            throw DataError("csv header mismatch at line 1, expected '" + std::string(kCorpusCsvHeader) + "'");
        for (std::size_t r = 1; r < records.size(); ++r) {
            auto& rec = records[r];
            if (rec.fields.size() == 1 && detail::trim(rec.fields[0]).empty()) continue;  // blank trailing line
            if (rec.fields.size() != 5)
                throw DataError("malformed row at line " + std::to_string(rec.line) + ": expected 5 fields, got " +
                                std::to_string(rec.fields.size()));
            ++record_index;
            add(detail::make_document(std::move(rec.fields), record_index, result.warnings));
        }
    } else {
        auto lines = split_lines(raw);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (detail::trim(lines[i]).empty()) continue;
            nlohmann::json obj = nlohmann::json::parse(lines[i], nullptr, false);
            if (obj.is_discarded() || !obj.is_object())
                throw DataError("malformed row at line " + std::to_string(i + 1) + ": not a JSON object");
            for (const char* key : {"id", "institution", "program", "course_type", "text"}) {
                if (!obj.contains(key) || !obj[key].is_string())
                    throw DataError("malformed row at line " + std::to_string(i + 1) + ": missing string field '" +
                                    key + "'");
            }
            ++record_index;
            std::vector<std::string> fields = {obj["id"], obj["institution"], obj["program"], obj["course_type"],
                                               obj["text"]};
            add(detail::make_document(std::move(fields), record_index, result.warnings));
        }
        if (result.set.documents.empty()) throw DataError("empty corpus file: " + path);
    }
    return result;
}

struct FilterCriteria {
    std::vector<std::string> institutions;  // empty = keep all
    std::vector<CourseType> course_types;   // empty = keep all
};

/// Order-preserving subset. Empty criteria are a no-op; a filter that matches
/// nothing is an error because downstream fitting is undefined on zero documents.
inline DocumentSet filter_documents(const DocumentSet& set, const FilterCriteria& criteria) {
    for (const auto& inst : criteria.institutions)
        if (inst.empty()) throw DataError("filter: empty institution name in criteria");
    DocumentSet out;
    out.source_path = set.source_path;
    out.source_format = set.source_format;
    for (const auto& doc : set.documents) {
        bool inst_ok = criteria.institutions.empty() ||
                       std::find(criteria.institutions.begin(), criteria.institutions.end(), doc.institution) !=
                           criteria.institutions.end();
        bool type_ok = criteria.course_types.empty() ||
                       std::find(criteria.course_types.begin(), criteria.course_types.end(), doc.course_type) !=
                           criteria.course_types.end();
        if (inst_ok && type_ok) out.documents.push_back(doc);
    }
    if (out.documents.empty()) throw DataError("filter matched zero documents");
    return out;
}

struct CorpusStats {
    // institution -> counts per course type, institutions in name order
    std::map<std::string, std::array<std::size_t, 4>> cells;
    std::size_t total_documents = 0;
    std::size_t distinct_programs = 0;
    std::size_t distinct_institutions = 0;

    std::size_t count(const std::string& institution, CourseType t) const {
        auto it = cells.find(institution);
        if (it == cells.end()) return 0;
        return it->second[static_cast<std::size_t>(t)];
    }
    std::size_t institution_total(const std::string& institution) const {
        auto it = cells.find(institution);
        if (it == cells.end()) return 0;
        std::size_t s = 0;
        for (auto c : it->second) s += c;
        return s;
    }
};

/// Cross-tabulation of documents by institution and course type. Distinct
/// programs are counted as unique (institution, program) pairs.
inline CorpusStats corpus_stats(const DocumentSet& set) {
    if (set.documents.empty()) throw DataError("corpus_stats: empty document set");
    CorpusStats stats;
    std::set<std::pair<std::string, std::string>> programs;
    for (const auto& doc : set.documents) {
        auto& row = stats.cells[doc.institution];
        row[static_cast<std::size_t>(doc.course_type)] += 1;
        programs.insert({doc.institution, doc.program});
    }
    stats.total_documents = set.documents.size();
    stats.distinct_programs = programs.size();
    stats.distinct_institutions = stats.cells.size();
    return stats;
}

inline std::string corpus_stats_csv(const CorpusStats& stats) {
    std::string out = "institution,program,core,elective,core_or_elective,total\n";
    for (const auto& [inst, row] : stats.cells) {
        std::size_t total = row[0] + row[1] + row[2] + row[3];
        out += csv::quote(inst);
        for (auto c : row) out += "," + std::to_string(c);
        out += "," + std::to_string(total) + "\n";
    }
    out += "TOTAL," + std::to_string(stats.total_documents) + ",programs," + std::to_string(stats.distinct_programs) +
           ",institutions," + std::to_string(stats.distinct_institutions) + "\n";
    return out;
}

inline std::string documents_to_jsonl(const DocumentSet& set) {
    std::string out;
    for (const auto& doc : set.documents) {
        nlohmann::json obj;
        obj["id"] = doc.id;
        obj["institution"] = doc.institution;
        obj["program"] = doc.program;
        obj["course_type"] = to_string(doc.course_type);
        obj["text"] = doc.text;
        out += obj.dump();
        out += "\n";
    }
    return out;
}

}  // namespace skillscope
