#pragma once

#include <cstdint>
#include <filesystem>

#include "nftaudit/synth.hpp"
#include "nftaudit/wash_audit.hpp"

namespace nftaudit {

// Empty-set conventions: precision := 1 when nothing was predicted, recall
// := 1 when the truth set is empty (no positives to miss). F1 is 0 when
// precision + recall is 0.
struct ConfusionMetrics {
    std::int64_t true_positives = 0;
    std::int64_t false_positives = 0;
    std::int64_t false_negatives = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 0.0;
};

struct EvalMetrics {
    ConfusionMetrics address;  // positives = flagged addresses
    ConfusionMetrics trade;    // positives = suspicious tx ids
};

// Scores an audit outcome against ground truth. Every address and tx id on
// either side must exist in `corpus`; anything unknown means the audit or
// the truth file belongs to a different corpus and raises CorpusError.
EvalMetrics evaluate(const Corpus& corpus, const GroundTruth& truth,
                     const AuditOutcome& outcome);

EvalMetrics evaluate(const LabeledCorpus& labeled, const AuditOutcome& outcome);

void write_metrics_json(const EvalMetrics& metrics, const std::filesystem::path& path);

}  // namespace nftaudit
