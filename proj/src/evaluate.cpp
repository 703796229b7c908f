#include "nftaudit/evaluate.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace nftaudit {

namespace {

ConfusionMetrics confusion(const std::set<std::string>& predicted,
                           const std::set<std::string>& truth) {
    ConfusionMetrics m;
    for (const auto& p : predicted)
        truth.count(p) ? ++m.true_positives : ++m.false_positives;
    for (const auto& t : truth)
        if (!predicted.count(t)) ++m.false_negatives;

    const auto tp = static_cast<double>(m.true_positives);
    m.precision = predicted.empty() ? 1.0 : tp / static_cast<double>(predicted.size());
    m.recall = truth.empty() ? 1.0 : tp / static_cast<double>(truth.size());
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

void require_known(const std::set<std::string>& ids, const std::set<std::string>& universe,
                   const char* what) {
    for (const auto& id : ids)
        if (!universe.count(id))
            throw CorpusError(std::string("evaluate: ") + what + " '" + id +
                              "' not present in corpus (mismatched corpora?)");
}

}  // namespace

EvalMetrics evaluate(const Corpus& corpus, const GroundTruth& truth,
                     const AuditOutcome& outcome) {
    std::set<std::string> known_addresses;
    std::set<std::string> known_txs;
    for (const auto& r : corpus.records()) {
        known_addresses.insert(r.buyer);
        known_addresses.insert(r.seller);
        known_txs.insert(r.tx_id);
    }

    std::set<std::string> flagged;
    std::set<std::string> suspicious;
    for (const auto& report : outcome.reports) {
        for (const auto& f : report.suspicious_addresses) flagged.insert(f.address);
        suspicious.insert(report.suspicious_trades.begin(), report.suspicious_trades.end());
    }

    require_known(flagged, known_addresses, "flagged address");
    require_known(suspicious, known_txs, "suspicious tx");
    require_known(truth.wash_addresses, known_addresses, "ground-truth address");
    require_known(truth.wash_tx_ids, known_txs, "ground-truth tx");

    EvalMetrics metrics;
    metrics.address = confusion(flagged, truth.wash_addresses);
    metrics.trade = confusion(suspicious, truth.wash_tx_ids);
    return metrics;
}

EvalMetrics evaluate(const LabeledCorpus& labeled, const AuditOutcome& outcome) {
    GroundTruth truth{labeled.wash_addresses, labeled.wash_tx_ids};
    return evaluate(labeled.corpus, truth, outcome);
}

void write_metrics_json(const EvalMetrics& metrics, const std::filesystem::path& path) {
    auto level = [](const ConfusionMetrics& m) {
        return nlohmann::json{{"true_positives", m.true_positives},
                              {"false_positives", m.false_positives},
                              {"false_negatives", m.false_negatives},
                              {"precision", m.precision},
                              {"recall", m.recall},
                              {"f1", m.f1}};
    };
    nlohmann::json j{{"address", level(metrics.address)}, {"trade", level(metrics.trade)}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw CorpusError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

}  // namespace nftaudit
