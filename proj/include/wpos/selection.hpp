// Copyright 2026 The wpos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WPOS_SELECTION_HPP
#define WPOS_SELECTION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wpos/specfun.hpp"

namespace wpos {

/// Scale and noncentrality estimates for a candidate signal-bin count F:
/// psi2 is the mean of the N_b - F smallest ordered powers, lambda[n] the
/// excess of ordered power n over psi2 (clipped at zero).
struct BinParameters {
    double psi2 = 0.0;
    std::vector<double> lambdas;
    int clipped = 0; // negative noncentrality estimates forced to zero
};

inline BinParameters estimate_parameters(const std::vector<double>& mean_ordered, int signal_bins)
{
    const int total = static_cast<int>(mean_ordered.size());
    if (signal_bins < 0 || signal_bins >= total)
        throw std::invalid_argument("selection: signal bin count must leave noise bins");

    BinParameters params;
    double noise_sum = 0.0;
    for (int n = signal_bins; n < total; ++n) noise_sum += mean_ordered[n];
    params.psi2 = noise_sum / static_cast<double>(total - signal_bins);
    if (!(params.psi2 > 0.0))
        throw std::invalid_argument("selection: noise power estimate must be > 0");

    params.lambdas.reserve(signal_bins);
    for (int n = 0; n < signal_bins; ++n) {
        double lambda = mean_ordered[n] - params.psi2;
        if (lambda < 0.0) {
            lambda = 0.0;
            ++params.clipped;
        }
        params.lambdas.push_back(lambda);
    }
    return params;
}

/// Joint log-likelihood of the mean ordered powers under F noncentral bins
/// (approximated by the effective central scale) and N_b - F central bins,
/// with plug-in parameter estimates. F = 0 treats every bin as noise.
inline double log_likelihood(const std::vector<double>& mean_ordered, int signal_bins, double nu)
{
    const BinParameters params = estimate_parameters(mean_ordered, signal_bins);
    double ll = 0.0;
    for (std::size_t n = 0; n < mean_ordered.size(); ++n) {
        if (static_cast<int>(n) < signal_bins)
            ll += chi2_log_pdf_noncentral_approx(mean_ordered[n], params.psi2, params.lambdas[n],
                                                 nu);
        else
            ll += chi2_log_pdf_central(mean_ordered[n], params.psi2, nu);
    }
    return ll;
}

/// Midpoint power separating the F assumed signal bins from the rest.
inline double threshold_power(const std::vector<double>& mean_ordered, int signal_bins)
{
    if (signal_bins < 1 || signal_bins >= static_cast<int>(mean_ordered.size()))
        throw std::invalid_argument("selection: threshold needs 1 <= F < N_b");
    return 0.5 * (mean_ordered[signal_bins - 1] + mean_ordered[signal_bins]);
}

/// Probability of each assumed signal bin exceeding the separating threshold:
/// Q_{nu/2}(sqrt(2 (lambda/psi^2)^2), sqrt(2 P_th / psi^2)).
inline std::vector<double> exceedance_probs(const BinParameters& params, double threshold,
                                            double nu)
{
    std::vector<double> probs;
    probs.reserve(params.lambdas.size());
    const double b = std::sqrt(2.0 * threshold / params.psi2);
    for (double lambda : params.lambdas) {
        const double ratio = lambda / params.psi2;
        probs.push_back(marcum_q(0.5 * nu, std::sqrt(2.0 * ratio * ratio), b));
    }
    return probs;
}

/// Poisson-binomial distribution of the number of exceeding bins; entry f is
/// the probability that exactly f of the F bins pass the threshold.
inline std::vector<double> acquisition_probs(const std::vector<double>& exceed_probs)
{
    std::vector<double> dist(exceed_probs.size() + 1, 0.0);
    dist[0] = 1.0;
    std::size_t used = 0;
    for (double p : exceed_probs) {
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("selection: exceedance probability outside [0, 1]");
        ++used;
        for (std::size_t f = used; f > 0; --f) dist[f] = dist[f] * (1.0 - p) + dist[f - 1] * p;
        dist[0] *= (1.0 - p);
    }
    return dist;
}

/// KNN Kullback-Leibler estimate between two sample sets. The leading factor
/// is configurable; distances use the full vectors. Searching a point's own
/// set always excludes the point itself, so the self-divergence of a set
/// reduces to log(n / (n - 1)).
inline double knn_kl(const std::vector<std::vector<double>>& from,
                     const std::vector<std::vector<double>>& to, int neighbors, double dim_factor,
                     int* zero_distance_fixups = nullptr)
{
    const std::size_t n = from.size();
    const std::size_t m = to.size();
    if (n <= static_cast<std::size_t>(neighbors) || m < static_cast<std::size_t>(neighbors))
        throw std::invalid_argument("selection: sample counts must exceed the neighbor count");
    const bool same_set = (&from == &to);

    auto sq_dist = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            s += d * d;
        }
        return s;
    };

    double log_ratio_sum = 0.0;
    std::vector<double> d_self(n - 1), d_other;
    for (std::size_t i = 0; i < n; ++i) {
        d_self.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d_self.push_back(sq_dist(from[i], from[j]));
        std::nth_element(d_self.begin(), d_self.begin() + (neighbors - 1), d_self.end());
        double r_self = std::sqrt(d_self[neighbors - 1]);

        double r_other;
        if (same_set) {
            r_other = r_self;
        } else {
            d_other.clear();
            for (std::size_t j = 0; j < m; ++j) d_other.push_back(sq_dist(from[i], to[j]));
            std::nth_element(d_other.begin(), d_other.begin() + (neighbors - 1), d_other.end());
            r_other = std::sqrt(d_other[neighbors - 1]);
        }

        constexpr double kZeroFixup = 1e-12;
        if (r_self <= 0.0 || r_other <= 0.0) {
            if (r_self <= 0.0) r_self = kZeroFixup;
            if (r_other <= 0.0) r_other = kZeroFixup;
            if (zero_distance_fixups != nullptr) ++(*zero_distance_fixups);
        }
        log_ratio_sum += std::log(r_other / r_self);
    }

    return dim_factor / static_cast<double>(n) * log_ratio_sum
           + std::log(static_cast<double>(m) / static_cast<double>(n - 1));
}

/// Average pairwise KNN divergence over all zone pairs (diagonal included),
/// scaled by 1 / (N_z^2 sqrt(F)).
inline double mean_kl(const std::vector<std::vector<std::vector<double>>>& zone_samples,
                      int neighbors, int signal_bins, double dim_factor,
                      int* zero_distance_fixups = nullptr)
{
    const std::size_t zones = zone_samples.size();
    if (zones == 0) throw std::invalid_argument("selection: no zone samples");
    double total = 0.0;
    for (std::size_t i = 0; i < zones; ++i)
        for (std::size_t j = 0; j < zones; ++j)
            total += knn_kl(zone_samples[i], zone_samples[j], neighbors, dim_factor,
                            zero_distance_fixups);
    return total
           / (static_cast<double>(zones) * static_cast<double>(zones)
              * std::sqrt(static_cast<double>(signal_bins)));
}

/// Everything computed for one candidate F.
struct SelectionRow {
    int signal_bins = 0;
    double psi2 = 0.0;
    std::vector<double> lambdas;
    double log_likelihood = 0.0;
    double ll_gain = 0.0; // LL_F - LL_0
    double threshold = 0.0;
    std::vector<double> exceed_probs;
    std::vector<double> acq_probs;
    double info_weight = 0.0; // sum_f P_f f / F
    double kl = 0.0;
    double term_a = 0.0;
    double term_b = 0.0;
    double criterion = 0.0;
};

struct SelectionTables {
    std::vector<SelectionRow> rows;
    double ll_baseline = 0.0; // LL_0
    int f_star = 0;
    int clipped_lambdas = 0;
    int zero_distance_fixups = 0;
    bool ll_gain_degenerate = false; // max LL gain <= 0, term (a) zeroed
    bool kl_degenerate = false;      // max KL <= 0, term (b) zeroed
};

/// How the leading factor of the KNN divergence scales with the feature set.
enum class KlDimFactor {
    signal_bins, // factor F
    full_vector  // factor 2 F M
};

struct SelectionConfig {
    int f_min = 4;
    int f_max = 10;
    double nu = 8.0;
    double epsilon_weight = 0.8;
    int knn_neighbors = 30;
    KlDimFactor dim_factor = KlDimFactor::signal_bins;
    int sensor_count = 12; // used by the full_vector factor only

    void validate(std::size_t bin_count) const
    {
        if (f_min < 1 || f_min > f_max || f_max >= static_cast<int>(bin_count))
            throw std::invalid_argument("selection: need 1 <= f_min <= f_max < N_b");
        if (epsilon_weight < 0.0 || epsilon_weight > 1.0)
            throw std::invalid_argument("selection: weight must lie in [0, 1]");
        if (knn_neighbors < 1) throw std::invalid_argument("selection: neighbors must be >= 1");
        if (!(nu >= 1.0)) throw std::invalid_argument("selection: nu must be >= 1");
    }
};

/// Fills the likelihood-side columns (everything except the divergence term)
/// for each F in the configured range.
inline SelectionTables build_likelihood_tables(const std::vector<double>& mean_ordered,
                                               const SelectionConfig& config)
{
    config.validate(mean_ordered.size());
    for (std::size_t n = 1; n < mean_ordered.size(); ++n)
        if (mean_ordered[n] > mean_ordered[n - 1] * (1.0 + 1e-12))
            throw std::invalid_argument("selection: mean ordered powers must be nonincreasing");

    SelectionTables tables;
    tables.ll_baseline = log_likelihood(mean_ordered, 0, config.nu);
    for (int f = config.f_min; f <= config.f_max; ++f) {
        SelectionRow row;
        row.signal_bins = f;
        BinParameters params = estimate_parameters(mean_ordered, f);
        tables.clipped_lambdas += params.clipped;
        row.psi2 = params.psi2;
        row.lambdas = params.lambdas;
        row.log_likelihood = log_likelihood(mean_ordered, f, config.nu);
        row.ll_gain = row.log_likelihood - tables.ll_baseline;
        row.threshold = threshold_power(mean_ordered, f);
        row.exceed_probs = exceedance_probs(params, row.threshold, config.nu);
        row.acq_probs = acquisition_probs(row.exceed_probs);
        double weight = 0.0;
        for (std::size_t k = 0; k <= static_cast<std::size_t>(f); ++k)
            weight += row.acq_probs[k] * static_cast<double>(k) / static_cast<double>(f);
        row.info_weight = weight;
        tables.rows.push_back(std::move(row));
    }
    return tables;
}

/// Normalizes both terms by their maxima over the F grid, combines them with
/// the epsilon weight, and picks the argmax (ties break toward smaller F).
/// A non-positive maximum zeroes that term and flags the result.
inline void combine_criterion(SelectionTables& tables, double epsilon_weight)
{
    double max_gain = 0.0, max_kl = 0.0;
    for (const SelectionRow& row : tables.rows) {
        max_gain = std::max(max_gain, row.ll_gain);
        max_kl = std::max(max_kl, row.kl);
    }
    tables.ll_gain_degenerate = !(max_gain > 0.0);
    tables.kl_degenerate = !(max_kl > 0.0);

    double best = -1.0;
    for (SelectionRow& row : tables.rows) {
        row.term_a = tables.ll_gain_degenerate ? 0.0 : row.info_weight * row.ll_gain / max_gain;
        row.term_b = tables.kl_degenerate ? 0.0 : row.kl / max_kl;
        row.criterion = epsilon_weight * row.term_a + (1.0 - epsilon_weight) * row.term_b;
        if (row.criterion > best) {
            best = row.criterion;
            tables.f_star = row.signal_bins;
        }
    }
}

/// Weighted combination of already-normalized criterion terms: entry i
/// belongs to F = f_min + i. Returns the criterion values and the argmax F
/// (ties toward smaller F).
struct CriterionResult {
    std::vector<double> criterion;
    int f_star = 0;
};

inline CriterionResult combine_injected(const std::vector<double>& term_a,
                                        const std::vector<double>& term_b, double epsilon_weight,
                                        int f_min)
{
    if (term_a.size() != term_b.size() || term_a.empty())
        throw std::invalid_argument("selection: term sequences must match and be nonempty");
    CriterionResult result;
    result.criterion.reserve(term_a.size());
    double best = -1.0;
    for (std::size_t i = 0; i < term_a.size(); ++i) {
        const double value = epsilon_weight * term_a[i] + (1.0 - epsilon_weight) * term_b[i];
        result.criterion.push_back(value);
        if (value > best) {
            best = value;
            result.f_star = f_min + static_cast<int>(i);
        }
    }
    return result;
}

/// Full selection: likelihood tables, per-F divergence over the zone-grouped
/// normalized feature sets, and the weighted criterion. `zone_samples_per_f`
/// holds, for each F in the range, the per-zone sample vectors of dimension
/// 2 F M.
inline SelectionTables
select_feature_size(const std::vector<double>& mean_ordered,
                    const std::vector<std::vector<std::vector<std::vector<double>>>>&
                        zone_samples_per_f,
                    const SelectionConfig& config)
{
    SelectionTables tables = build_likelihood_tables(mean_ordered, config);
    if (zone_samples_per_f.size() != tables.rows.size())
        throw std::invalid_argument("selection: one zone-sample set required per F");

    for (std::size_t i = 0; i < tables.rows.size(); ++i) {
        SelectionRow& row = tables.rows[i];
        const double factor = (config.dim_factor == KlDimFactor::signal_bins)
                                  ? static_cast<double>(row.signal_bins)
                                  : 2.0 * row.signal_bins * config.sensor_count;
        row.kl = mean_kl(zone_samples_per_f[i], config.knn_neighbors, row.signal_bins, factor,
                         &tables.zero_distance_fixups);
    }
    combine_criterion(tables, config.epsilon_weight);
    return tables;
}

} // namespace wpos

#endif // WPOS_SELECTION_HPP
