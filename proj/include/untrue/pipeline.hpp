#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "untrue/corpus_ingest.hpp"
#include "untrue/enrichment.hpp"
#include "untrue/search_index.hpp"
#include "untrue/verdict.hpp"
#include "untrue/workflow.hpp"

namespace untrue {

/// Stage inputs and outputs. Each stage reads its predecessor's file from
/// work_dir, so any stage can be re-run on its own.
struct PipelineConfig {
    std::filesystem::path archive;
    std::filesystem::path templates_dir;
    std::filesystem::path lexicon;    // empty: built-in seed lexicon
    std::filesystem::path gazetteer;  // empty: no entity linking
    std::filesystem::path work_dir;
    std::filesystem::path snapshot;
    std::filesystem::path run_log;    // empty: no run log
    std::size_t workers = 1;
    std::vector<TaskSpec> tasks;

    std::filesystem::path claims_file() const { return work_dir / "claims.jsonl"; }
    std::filesystem::path normalized_file() const { return work_dir / "normalized.jsonl"; }
    std::filesystem::path enriched_file() const { return work_dir / "enriched.jsonl"; }

    /// Relative paths resolve against the config file's directory. Without a
    /// "tasks" list the chain ingest -> normalize -> enrich -> index is used.
    static PipelineConfig load(const std::filesystem::path& path);
};

std::vector<TaskSpec> default_pipeline_tasks();

struct NormalizedRecord {
    ClaimRecord record;
    Verdict verdict = Verdict::Other;
};

RatingInfo rating_of(const ClaimRecord& r);

std::vector<ClaimRecord> read_claim_records(const std::filesystem::path& path);
void write_claim_records(const std::filesystem::path& path, const std::vector<ClaimRecord>& records);
std::vector<NormalizedRecord> read_normalized(const std::filesystem::path& path);
void write_normalized(const std::filesystem::path& path, const std::vector<NormalizedRecord>& records);
std::vector<EnrichedClaim> read_enriched(const std::filesystem::path& path);
void write_enriched(const std::filesystem::path& path, const std::vector<EnrichedClaim>& claims);

IngestReport run_ingest_stage(const std::filesystem::path& archive, const TemplateRegistry& registry,
                              const std::filesystem::path& out);
std::vector<NormalizedRecord> normalize_records(const std::vector<ClaimRecord>& records, const LabelLexicon& lexicon);
std::vector<EnrichedClaim> enrich_records(const std::vector<NormalizedRecord>& records,
                                          const TemplateRegistry& registry, const EntityGazetteer& gazetteer);

LabelLexicon load_lexicon_or_seed(const std::filesystem::path& path);
EntityGazetteer load_gazetteer_or_empty(const std::filesystem::path& path);

/// Actions "ingest", "normalize", "enrich" and "index". With a live index the
/// index stage writes into it (single writer) before saving the snapshot.
ActionRegistry make_pipeline_actions(const PipelineConfig& config, SearchIndex* live_index = nullptr);

DagRun run_pipeline(const PipelineConfig& config, const std::string& run_id, SearchIndex* live_index = nullptr,
                    const std::function<void(const DagRun&)>& on_update = {});

}  // namespace untrue
