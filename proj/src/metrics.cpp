#include "polarair/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "polarair/errors.hpp"

namespace polarair {

SetTaxonomy build_taxonomy(const SparseVector& g_sum, std::size_t k,
                           std::vector<std::uint32_t> recovered, std::size_t n) {
    SetTaxonomy tax;
    tax.n = n;

    std::vector<std::size_t> order(g_sum.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ma = std::fabs(g_sum.values[a]), mb = std::fabs(g_sum.values[b]);
        if (ma != mb) return ma > mb;
        return g_sum.indices[a] < g_sum.indices[b];
    });
    order.resize(std::min(k, order.size()));
    for (std::size_t t : order) tax.top.push_back(g_sum.indices[t]);
    std::sort(tax.top.begin(), tax.top.end());

    std::set_difference(g_sum.indices.begin(), g_sum.indices.end(),
                        tax.top.begin(), tax.top.end(),
                        std::back_inserter(tax.other_active));

    std::sort(recovered.begin(), recovered.end());
    recovered.erase(std::unique(recovered.begin(), recovered.end()),
                    recovered.end());
    tax.recovered = std::move(recovered);
    return tax;
}

RoundStats compute_round_stats(const SetTaxonomy& tax) {
    auto overlap = [](const std::vector<std::uint32_t>& a,
                      const std::vector<std::uint32_t>& b) {
        std::vector<std::uint32_t> out;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                              std::back_inserter(out));
        return out.size();
    };
    RoundStats stats;
    const std::size_t hit = overlap(tax.recovered, tax.top);
    stats.pd = tax.top.empty()
                   ? 0.0
                   : static_cast<double>(hit) / static_cast<double>(tax.top.size());
    stats.pfa = tax.recovered.empty()
                    ? 0.0
                    : static_cast<double>(tax.recovered.size() - hit) /
                          static_cast<double>(tax.recovered.size());
    stats.b_hat = overlap(tax.recovered, tax.other_active);
    stats.active = tax.top.size() + tax.other_active.size();
    return stats;
}

namespace {

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_io_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

void emit_records(const ExperimentResult& result, const std::string& rounds_path,
                  const std::string& epochs_path) {
    {
        std::ofstream out = open_out(rounds_path);
        out << "epoch,round,mode,channel_uses,channel_uses_cum,recovered,pd,pfa,"
               "b_hat,active_count,L,n_c,aborted\n";
        const std::string mode = to_string(result.mode);
        for (const RoundRecord& r : result.rounds) {
            out << r.epoch << ',' << r.round << ',' << mode << ','
                << r.channel_uses << ',' << r.channel_uses_cum << ','
                << r.recovered << ',' << fmt6(r.pd) << ',' << fmt6(r.pfa) << ','
                << r.b_hat << ',' << r.active_count << ',' << r.L << ','
                << r.n_c << ',' << (r.aborted ? 1 : 0) << '\n';
        }
        if (!out) throw config_io_error("write failed: " + rounds_path);
    }
    {
        std::ofstream out = open_out(epochs_path);
        out << "epoch,test_accuracy,Q,L,n_c\n";
        for (const EpochRecord& e : result.epochs) {
            out << e.epoch << ',' << fmt6(e.test_accuracy) << ',' << fmt6(e.q)
                << ',' << e.L << ',' << e.n_c << '\n';
        }
        if (!out) throw config_io_error("write failed: " + epochs_path);
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos, 0);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw config_parse_error("key '" + key + "': expected integer, got '" +
                                 value + "'");
    }
}

double parse_f64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw config_parse_error("key '" + key + "': expected number, got '" +
                                 value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw config_parse_error("key '" + key + "': expected true/false, got '" +
                             value + "'");
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    auto u = [&] { return parse_u64(key, value); };
    auto f = [&] { return parse_f64(key, value); };

    if (key == "seed") cfg.codec.seed = u();
    else if (key == "mode") {
        if (value == "polarair") cfg.mode = Mode::polarair;
        else if (value == "dense") cfg.mode = Mode::dense;
        else throw config_parse_error("key 'mode': expected polarair|dense, got '" +
                                      value + "'");
    }
    else if (key == "noise_std") cfg.noise_std = f();
    else if (key == "epochs") cfg.epochs = u();
    else if (key == "rounds_per_epoch") cfg.rounds_per_epoch = u();
    else if (key == "workers" || key == "W") cfg.workers = u();
    else if (key == "N") cfg.codec.N = u();
    else if (key == "K") cfg.codec.K = u();
    else if (key == "B_f") cfg.codec.B_f = u();
    else if (key == "B_s") cfg.codec.B_s = u();
    else if (key == "r") cfg.codec.r = static_cast<unsigned>(u());
    else if (key == "crc_poly") cfg.codec.crc_poly = u();
    else if (key == "n_c") cfg.codec.n_c = u();
    else if (key == "L") cfg.codec.L = u();
    else if (key == "n_L") cfg.codec.n_L = u();
    else if (key == "P") cfg.codec.P = f();
    else if (key == "max_sic_iters") cfg.codec.max_sic_iters = u();
    else if (key == "dict_cache_mb") cfg.codec.dict_cache_mb = u();
    else if (key == "optimizer") {
        if (value == "adam") cfg.optimizer = OptimizerKind::adam;
        else if (value == "sgd") cfg.optimizer = OptimizerKind::sgd;
        else throw config_parse_error("key 'optimizer': expected adam|sgd, got '" +
                                      value + "'");
    }
    else if (key == "lr") cfg.adam.lr = f();
    else if (key == "gradient_source") {
        if (value == "mlp") cfg.source = GradientSource::mlp;
        else if (value == "synthetic") cfg.source = GradientSource::synthetic;
        else throw config_parse_error(
            "key 'gradient_source': expected mlp|synthetic, got '" + value + "'");
    }
    else if (key == "batch_size") cfg.batch_size = u();
    else if (key == "d_in") { cfg.layout.d_in = u(); cfg.data.feature_dim = cfg.layout.d_in; }
    else if (key == "d_h") cfg.layout.d_h = u();
    else if (key == "d_out") cfg.layout.d_out = u();
    else if (key == "classes") cfg.data.classes = u();
    else if (key == "train_size") cfg.data.train_size = u();
    else if (key == "test_size") cfg.data.test_size = u();
    else if (key == "mean_scale") cfg.data.mean_scale = f();
    else if (key == "cov_scale") cfg.data.cov_scale = f();
    else if (key == "explicit_rescale") cfg.explicit_rescale = parse_bool(key, value);
    else throw config_parse_error("unknown key '" + key + "'");
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_io_error("cannot open config file: " + path);

    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string entry = trim(line);
        if (entry.empty()) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw config_parse_error(path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        apply_config_entry(cfg, trim(entry.substr(0, eq)),
                           trim(entry.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

}  // namespace polarair
