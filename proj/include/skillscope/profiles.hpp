#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "skillscope/common.hpp"
#include "skillscope/corpus.hpp"
#include "skillscope/ctm.hpp"

namespace skillscope {

// Profiles cover only the programs that entered the analysis, never the
// institution as a whole; reports carry this note verbatim.
inline constexpr const char* kProfileScopeNote =
    "Shares describe the analyzed programs only, not the institution as a whole.";

struct InstitutionProfile {
    std::string institution;
    VectorXd shares;            // length K, sums to 1
    std::vector<int> ranking;   // topic indices, best first
    std::size_t program_count = 0;
    std::size_t document_count = 0;
};

inline std::vector<int> rank_by_share(const VectorXd& shares) {
    std::vector<int> order(shares.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (shares(a) != shares(b)) return shares(a) > shares(b);
        return a < b;
    });
    return order;
}

/// Two-stage aggregation: documents average into their (institution, program)
/// cell, programs average into the institution. With `flat` the profile is the
/// plain mean over the institution's documents instead; programs with many
/// course descriptions then dominate, which the two-stage rule avoids.
inline std::vector<InstitutionProfile> institution_profile(const DocumentTopicMatrix& posteriors,
                                                           const DocumentSet& metadata, bool flat = false) {
    std::map<std::string, std::pair<std::string, std::string>> doc_info;  // id -> (institution, program)
    for (const auto& doc : metadata.documents) doc_info[doc.id] = {doc.institution, doc.program};

    const int k = static_cast<int>(posteriors.theta.cols());
    // institution -> program -> posterior row indices
    std::map<std::string, std::map<std::string, std::vector<int>>> groups;
    for (std::size_t r = 0; r < posteriors.doc_ids.size(); ++r) {
        auto it = doc_info.find(posteriors.doc_ids[r]);
        if (it == doc_info.end())
            throw DataError("institution_profile: posterior row '" + posteriors.doc_ids[r] +
                            "' has no metadata record");
        groups[it->second.first][it->second.second].push_back(static_cast<int>(r));
    }

    std::vector<InstitutionProfile> profiles;
    profiles.reserve(groups.size());
    for (const auto& [institution, programs] : groups) {
        InstitutionProfile profile;
        profile.institution = institution;
        profile.program_count = programs.size();
        VectorXd acc = VectorXd::Zero(k);
        if (flat) {
            std::size_t docs = 0;
            for (const auto& [_, rows] : programs) {
                for (int r : rows) acc += posteriors.theta.row(r).transpose();
                docs += rows.size();
            }
            profile.document_count = docs;
            acc /= static_cast<double>(docs);
        } else {
            for (const auto& [_, rows] : programs) {
                VectorXd program_mean = VectorXd::Zero(k);
                for (int r : rows) program_mean += posteriors.theta.row(r).transpose();
                program_mean /= static_cast<double>(rows.size());
                acc += program_mean;
                profile.document_count += rows.size();
            }
            acc /= static_cast<double>(programs.size());
        }
        profile.shares = acc;
        profile.ranking = rank_by_share(acc);
        profiles.push_back(std::move(profile));
    }
    return profiles;
}

struct RankedTopics {
    std::vector<std::string> labels;  // best topic first
    std::vector<Warning> warnings;
};

/// Topic order for one institution, substituting user labels where provided.
/// Topics missing from the label map are reported by index with a warning.
inline RankedTopics rank_topics(const InstitutionProfile& profile,
                                const std::map<int, std::string>& label_map = {}) {
    RankedTopics out;
    for (std::size_t pos = 0; pos < profile.ranking.size(); ++pos) {
        int topic = profile.ranking[pos];
        auto it = label_map.find(topic);
        if (it != label_map.end()) {
            out.labels.push_back(it->second);
        } else {
            out.labels.push_back("topic_" + std::to_string(topic));
            if (!label_map.empty())
                out.warnings.push_back({pos, "no label for topic " + std::to_string(topic) + " in '" +
                                                 profile.institution + "', reported by index"});
        }
    }
    return out;
}

inline std::string profiles_csv(const std::vector<InstitutionProfile>& profiles) {
    std::string out = "institution,topic,share\n";
    for (const auto& p : profiles)
        for (int t = 0; t < p.shares.size(); ++t)
            out += csv::quote(p.institution) + "," + std::to_string(t) + "," + format_fixed6(p.shares(t)) + "\n";
    return out;
}

struct ProfileCell {
    std::string institution;
    int topic = 0;
    double share = 0.0;
};

inline std::vector<ProfileCell> parse_profiles_csv(const std::string& text) {
    auto records = csv::parse(text);
    if (records.empty() || records[0].fields != std::vector<std::string>{"institution", "topic", "share"})
        throw DataError("profiles csv: bad header");
    std::vector<ProfileCell> cells;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i].fields;
        if (f.size() != 3) throw DataError("profiles csv: malformed line " + std::to_string(records[i].line));
        cells.push_back({f[0], std::stoi(f[1]), std::stod(f[2])});
    }
    return cells;
}

inline std::string ranking_tsv(const std::vector<InstitutionProfile>& profiles,
                               const std::map<int, std::string>& label_map = {}) {
    std::string out = "institution\trank\ttopic_label\n";
    for (const auto& p : profiles) {
        auto ranked = rank_topics(p, label_map);
        for (std::size_t pos = 0; pos < ranked.labels.size(); ++pos)
            out += p.institution + "\t" + std::to_string(pos + 1) + "\t" + ranked.labels[pos] + "\n";
    }
    return out;
}

namespace svg_detail {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace svg_detail

/// One grouped bar chart for a single topic: one bar per institution, bar
/// height = that institution's share of the topic. Values are printed with
/// the same 6-decimal format the CSV uses.
inline std::string topic_bar_chart_svg(const std::vector<InstitutionProfile>& profiles, int topic,
                                       const std::string& topic_label) {
    if (profiles.empty()) throw DataError("topic_bar_chart_svg: no profiles");
    const double bar_w = 46.0;
    const double gap = 18.0;
    const double plot_h = 240.0;
    const double left = 70.0;
    const double top = 50.0;
    const double bottom = 80.0;
    const double width = left + profiles.size() * (bar_w + gap) + 30.0;
    const double height = top + plot_h + bottom;

    double max_share = 0.0;
    for (const auto& p : profiles) max_share = std::max(max_share, p.shares(topic));
    if (max_share <= 0.0) max_share = 1.0;

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + format_fixed6(width) +
         "\" height=\"" + format_fixed6(height) + "\">\n";
    s += "<desc>" + svg_detail::escape(kProfileScopeNote) + "</desc>\n";
    s += "<text x=\"" + format_fixed6(left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" +
         svg_detail::escape(topic_label) + "</text>\n";
    // y axis with 0 and max ticks
    s += "<line x1=\"" + format_fixed6(left - 8) + "\" y1=\"" + format_fixed6(top) + "\" x2=\"" +
         format_fixed6(left - 8) + "\" y2=\"" + format_fixed6(top + plot_h) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"8\" y=\"" + format_fixed6(top + plot_h + 4) +
         "\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n";
    s += "<text x=\"8\" y=\"" + format_fixed6(top + 4) + "\" font-family=\"sans-serif\" font-size=\"10\">" +
         format_fixed6(max_share) + "</text>\n";

    for (std::size_t i = 0; i < profiles.size(); ++i) {
        double share = profiles[i].shares(topic);
        double h = plot_h * share / max_share;
        double x = left + i * (bar_w + gap);
        double y = top + plot_h - h;
        s += "<rect x=\"" + format_fixed6(x) + "\" y=\"" + format_fixed6(y) + "\" width=\"" + format_fixed6(bar_w) +
             "\" height=\"" + format_fixed6(h) + "\" fill=\"#4878a8\"/>\n";
        s += "<text x=\"" + format_fixed6(x) + "\" y=\"" + format_fixed6(y - 4) +
             "\" font-family=\"sans-serif\" font-size=\"9\">" + format_fixed6(share) + "</text>\n";
        s += "<text x=\"" + format_fixed6(x) + "\" y=\"" + format_fixed6(top + plot_h + 14) +
             "\" font-family=\"sans-serif\" font-size=\"9\" transform=\"rotate(35 " + format_fixed6(x) + " " +
             format_fixed6(top + plot_h + 14) + ")\">" + svg_detail::escape(profiles[i].institution) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

enum class ProfileExportFormat { Csv, Svg };

/// Writes profiles.csv or one SVG bar chart per topic into out_dir; returns
/// the paths written.
inline std::vector<std::string> export_profiles(const std::vector<InstitutionProfile>& profiles,
                                                ProfileExportFormat format, const std::string& out_dir,
                                                const std::map<int, std::string>& label_map = {}) {
    if (profiles.empty()) throw DataError("export_profiles: no profiles");
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::vector<std::string> written;
    if (format == ProfileExportFormat::Csv) {
        auto path = (dir / "profiles.csv").string();
        csv::write_file(path, profiles_csv(profiles));
        written.push_back(path);
    } else {
        const int k = static_cast<int>(profiles.front().shares.size());
        for (int t = 0; t < k; ++t) {
            std::string label = "topic_" + std::to_string(t);
            auto it = label_map.find(t);
            if (it != label_map.end()) label = it->second;
            auto path = (dir / ("profiles_topic_" + std::to_string(t) + ".svg")).string();
            csv::write_file(path, topic_bar_chart_svg(profiles, t, label));
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace skillscope
