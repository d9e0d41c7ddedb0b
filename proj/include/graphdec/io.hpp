#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include "graphdec/analysis.hpp"
#include "graphdec/theorylab.hpp"
#include "graphdec/trainer.hpp"

namespace graphdec {

namespace fs = std::filesystem;

/// Writes text with LF line endings, creating parent directories. Throws LoadError.
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

/// Floats with 9 significant digits.
std::string format_g9(double v);

/// One object per epoch: epoch, loss, subset_size, keep_fraction, seconds.
void write_metrics_jsonl(const fs::path& path, const std::vector<EpochTrace>& traces);

/// epoch,sample_id,raw_score,normalized_score,in_subset,in_bin
void write_scores_csv(const fs::path& path, const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> read_scores_csv(const fs::path& path);

nlohmann::json eval_to_json(const EvalReport& r);
nlohmann::json split_to_json(const SplitResult& s);
SplitResult split_from_json(const nlohmann::json& j);

struct EmbeddingTable {
  std::vector<int> ids;
  std::vector<int> labels;
  Matrix values;
};

/// id,label,e0,e1,...
void write_embeddings_csv(const fs::path& path, const EmbeddingTable& table);
EmbeddingTable read_embeddings_csv(const fs::path& path);

/// Header epoch,<sample ids in column order>; one row per epoch.
void write_trace_csv(const fs::path& path, const ScoreTraceMatrix& m);

/// instance,family,policy,seed,lhs,rhs,holds,mean_err
void write_theorem_report(const fs::path& path, const std::vector<TheoremRow>& rows);

}  // namespace graphdec
