#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "skillscope/common.hpp"
#include "skillscope/csv.hpp"

#include <json.hpp>

namespace skillscope {

inline constexpr const char* kToolVersion = "0.1.0";

inline const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {"ingest", "preprocess", "fit", "scan", "topics", "profile"};
    return names;
}

// upstream stages each stage consumes (hash-checked before running)
inline std::vector<std::string> stage_dependencies(const std::string& stage) {
    if (stage == "ingest") return {};
    if (stage == "preprocess") return {"ingest"};
    if (stage == "fit") return {"preprocess"};
    if (stage == "scan") return {"preprocess"};
    if (stage == "topics") return {"fit"};
    if (stage == "profile") return {"ingest", "preprocess", "fit"};
    throw DataError("unknown stage: " + stage);
}

inline std::string file_digest(const std::string& path) {
    return hex_digest(fnv1a(csv::read_file(path)));
}

// Exclusive lock file: one writer per run directory. Stale locks (e.g. after
// a crash) have to be removed by hand; the error message says which file.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& run_dir) : path_(run_dir / ".lock") {
        int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0)
            throw DataError("run directory is locked by another run (remove " + path_.string() +
                            " if no run is active)");
        ::close(fd);
        held_ = true;
    }
    ~RunLock() {
        if (held_) {
            std::error_code ec;
            std::filesystem::remove(path_, ec);
        }
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
    bool held_ = false;
};

// Stage bookkeeping for a run directory: which stages completed, with which
// config digests, over which input/output artifacts. The manifest is the only
// artifact carrying wall-clock timestamps.
class RunManifest {
public:
    explicit RunManifest(std::string run_dir) : run_dir_(std::move(run_dir)) {
        std::filesystem::create_directories(run_dir_);
        auto path = manifest_path();
        if (std::filesystem::exists(path)) {
            data_ = nlohmann::json::parse(csv::read_file(path.string()), nullptr, false);
            if (data_.is_discarded()) throw DataError("corrupt manifest: " + path.string());
        } else {
            data_ = nlohmann::json{{"tool_version", kToolVersion}, {"stages", nlohmann::json::object()}};
        }
    }

    const std::filesystem::path& root() const { return run_dir_; }
    std::filesystem::path manifest_path() const { return run_dir_ / "manifest.json"; }
    std::filesystem::path artifact(const std::string& name) const { return run_dir_ / name; }

    bool has_stage(const std::string& stage) const { return data_["stages"].contains(stage); }

    void set_seed(std::uint64_t seed) { data_["seed"] = seed; }
    std::uint64_t seed() const { return data_.value("seed", std::uint64_t{42}); }

    // Verifies that every stage `stage` depends on has completed and that the
    // recorded output digests still match the files on disk.
    void require_upstream(const std::string& stage) const {
        for (const auto& dep : stage_dependencies(stage)) {
            if (!has_stage(dep))
                throw DataError("stage '" + stage + "' requires '" + dep + "' to run first");
            const auto& rec = data_["stages"][dep];
            for (const auto& [name, digest] : rec["outputs"].items()) {
                auto path = artifact(name);
                if (!std::filesystem::exists(path))
                    throw DataError("stale upstream: artifact '" + name + "' of stage '" + dep +
                                    "' is missing; re-run '" + dep + "'");
                if (file_digest(path.string()) != digest.get<std::string>())
                    throw DataError("stale upstream: artifact '" + name + "' changed since stage '" + dep +
                                    "' ran; re-run '" + dep + "'");
            }
        }
    }

    void record_stage(const std::string& stage, const std::string& config_digest,
                      const std::map<std::string, std::string>& input_digests,
                      const std::vector<std::string>& output_names) {
        nlohmann::json rec;
        rec["config_digest"] = config_digest;
        rec["inputs"] = input_digests;
        nlohmann::json outputs = nlohmann::json::object();
        for (const auto& name : output_names) outputs[name] = file_digest(artifact(name).string());
        rec["outputs"] = outputs;
        rec["completed_at"] = timestamp();
        data_["stages"][stage] = rec;
        save();
    }

    const nlohmann::json& stage(const std::string& name) const {
        if (!has_stage(name)) throw DataError("stage '" + name + "' has not run");
        return data_["stages"][name];
    }

    const nlohmann::json& json() const { return data_; }

    // write temp file then rename: readers never see a half-written manifest
    void save() const {
        auto tmp = run_dir_ / "manifest.json.tmp";
        csv::write_file(tmp.string(), data_.dump(2) + "\n");
        std::filesystem::rename(tmp, manifest_path());
    }

private:
    static std::string timestamp() {
        auto now = std::chrono::system_clock::now();
        std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::tm tm_utc;
        gmtime_r(&t, &tm_utc);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        return buf;
    }

    std::filesystem::path run_dir_;
    nlohmann::json data_;
};

}  // namespace skillscope
