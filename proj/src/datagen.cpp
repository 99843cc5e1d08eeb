#include <pgmoe/datagen.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace pgmoe {

void GenConfig::validate() const
{
	if (num_steps < 1)
		throw DomainError("generator needs at least one step");
	if (num_classes < 2)
		throw DomainError("generator needs at least two classes");
	if (feature_dim < 1)
		throw DomainError("generator needs at least one feature");
	if (!(base_persistence > 0.0 && base_persistence <= 1.0))
		throw DomainError("base_persistence must lie in (0, 1]");
	if (!(switch_signal_strength >= 0.0) || !std::isfinite(switch_signal_strength))
		throw DomainError("switch_signal_strength must be finite and non-negative");
	if (!(gap_probability >= 0.0 && gap_probability < 1.0))
		throw DomainError("gap_probability must lie in [0, 1)");
	if (!class_marginals.empty()) {
		if (class_marginals.size() != static_cast<std::size_t>(num_classes))
			throw DomainError("class_marginals must have one entry per class");
		double total = 0.0;
		for (double p : class_marginals) {
			if (!(p > 0.0))
				throw DomainError("class_marginals entries must be positive");
			total += p;
		}
		if (std::abs(total - 1.0) > 1e-9)
			throw DomainError("class_marginals must sum to 1");
	}
}

std::vector<double> GenConfig::marginals() const
{
	if (!class_marginals.empty())
		return class_marginals;
	return std::vector<double>(static_cast<std::size_t>(num_classes), 1.0 / num_classes);
}

RegimeChain regime_chain(const GenConfig& cfg)
{
	cfg.validate();
	const auto pi = cfg.marginals();
	const std::size_t q = pi.size();
	// probability flow between neighbouring classes; detailed balance holds by construction
	std::vector<double> flow(q - 1);
	for (std::size_t c = 0; c + 1 < q; ++c)
		flow[c] = std::min(pi[c], pi[c + 1]);
	const double scale = (1.0 - cfg.base_persistence) / (2.0 * std::accumulate(flow.begin(), flow.end(), 0.0));

	RegimeChain chain;
	chain.switch_prob.resize(q);
	chain.up_prob.resize(q);
	for (std::size_t c = 0; c < q; ++c) {
		const double down = c > 0 ? flow[c - 1] : 0.0;
		const double up = c + 1 < q ? flow[c] : 0.0;
		chain.switch_prob[c] = scale * (down + up) / pi[c];
		chain.up_prob[c] = up / (down + up);
		if (chain.switch_prob[c] > 1.0)
			throw DomainError("base_persistence " + std::to_string(cfg.base_persistence) +
			                  " is too low for the requested class marginals");
	}
	return chain;
}

namespace {

struct Transition {
	bool switched = false;
	int direction = 0; // +1 up, -1 down
};

Transition draw_transition(const RegimeChain& chain, std::size_t cls, std::mt19937_64& rng)
{
	std::uniform_real_distribution<double> unit(0.0, 1.0);
	Transition t;
	t.switched = unit(rng) < chain.switch_prob[cls];
	const double up_draw = unit(rng);
	if (t.switched)
		t.direction = up_draw < chain.up_prob[cls] ? 1 : -1;
	return t;
}

void draw_features(const Transition& t, double strength, std::span<double> x, std::mt19937_64& rng)
{
	std::normal_distribution<double> noise(0.0, 1.0);
	for (auto& v : x)
		v = noise(rng);
	if (t.switched) {
		x[0] += strength;
		if (x.size() > 1)
			x[1] += strength * t.direction;
	}
}

std::size_t draw_class(std::span<const double> pi, std::mt19937_64& rng)
{
	std::discrete_distribution<std::size_t> d(pi.begin(), pi.end());
	return d(rng);
}

double log_normal_kernel(double x, double mean)
{
	const double d = x - mean;
	return -0.5 * d * d;
}

} // namespace

std::vector<TimeSeriesRecord> generate(const GenConfig& cfg)
{
	const RegimeChain chain = regime_chain(cfg);
	const auto pi = cfg.marginals();
	std::mt19937_64 rng(cfg.seed);
	std::uniform_real_distribution<double> unit(0.0, 1.0);

	std::vector<TimeSeriesRecord> series;
	series.reserve(static_cast<std::size_t>(cfg.num_steps));
	std::size_t cls = draw_class(pi, rng);
	for (int t = 0; t < cfg.num_steps; ++t) {
		const Transition tr = draw_transition(chain, cls, rng);
		TimeSeriesRecord rec;
		rec.timestamp = t;
		rec.features.resize(static_cast<std::size_t>(cfg.feature_dim));
		draw_features(tr, cfg.switch_signal_strength, rec.features, rng);
		rec.label = OrdinalLabel::from_index(cls);
		const bool dropped = unit(rng) < cfg.gap_probability;
		if (!dropped)
			series.push_back(std::move(rec));
		if (tr.switched)
			cls = static_cast<std::size_t>(static_cast<int>(cls) + tr.direction);
	}
	return series;
}

double oracle_bayes_accuracy(const GenConfig& cfg, std::size_t samples)
{
	const RegimeChain chain = regime_chain(cfg);
	const auto pi = cfg.marginals();
	const std::size_t n = samples == 0 ? static_cast<std::size_t>(cfg.num_steps) : samples;
	const double s = cfg.switch_signal_strength;
	std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

	std::vector<double> x(static_cast<std::size_t>(cfg.feature_dim));
	std::size_t cls = draw_class(pi, rng);
	std::size_t hits = 0;
	for (std::size_t t = 0; t < n; ++t) {
		const Transition tr = draw_transition(chain, cls, rng);
		draw_features(tr, s, x, rng);

		// log posterior (up to a shared constant) of staying, moving up, moving down
		const double x1 = x.size() > 1 ? x[1] : 0.0;
		const bool has_dir = x.size() > 1;
		const double p_sw = chain.switch_prob[cls];
		const double p_up = p_sw * chain.up_prob[cls];
		const double p_down = p_sw * (1.0 - chain.up_prob[cls]);
		auto log_or_neg_inf = [](double p) { return p > 0.0 ? std::log(p) : -INFINITY; };
		const double stay = log_or_neg_inf(1.0 - p_sw) + log_normal_kernel(x[0], 0.0) +
		                    (has_dir ? log_normal_kernel(x1, 0.0) : 0.0);
		const double up = log_or_neg_inf(p_up) + log_normal_kernel(x[0], s) + (has_dir ? log_normal_kernel(x1, s) : 0.0);
		const double down =
		    log_or_neg_inf(p_down) + log_normal_kernel(x[0], s) + (has_dir ? log_normal_kernel(x1, -s) : 0.0);

		int guess = 0;
		double best = stay;
		if (down > best) {
			best = down;
			guess = -1;
		}
		if (up > best)
			guess = 1;
		const int actual = tr.switched ? tr.direction : 0;
		hits += guess == actual ? 1 : 0;
		if (tr.switched)
			cls = static_cast<std::size_t>(static_cast<int>(cls) + tr.direction);
	}
	return static_cast<double>(hits) / static_cast<double>(n);
}

} // namespace pgmoe
