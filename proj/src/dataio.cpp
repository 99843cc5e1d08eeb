#include <pgmoe/dataio.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace pgmoe {

using nlohmann::json;

std::string format_double(double v)
{
	if (std::isnan(v))
		return "nan";
	char buf[40];
	std::snprintf(buf, sizeof(buf), "%.17g", v);
	return buf;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& content)
{
	auto tmp = path;
	tmp += ".tmp";
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if (!out)
			throw DomainError("cannot write " + path.string());
		out << content;
		if (!out)
			throw DomainError("failed writing " + path.string());
	}
	std::error_code ec;
	std::filesystem::rename(tmp, path, ec);
	if (ec) {
		std::filesystem::remove(tmp, ec);
		throw DomainError("cannot move output into place at " + path.string());
	}
}

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
	std::vector<std::string> cells;
	std::string cell;
	std::istringstream in(line);
	while (std::getline(in, cell, ','))
		cells.push_back(cell);
	if (!line.empty() && line.back() == ',')
		cells.emplace_back();
	return cells;
}

std::string strip(std::string s)
{
	while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
		s.pop_back();
	std::size_t b = 0;
	while (b < s.size() && (s[b] == ' ' || s[b] == '\t'))
		++b;
	return s.substr(b);
}

double parse_real(const std::string& text, std::size_t line_no)
{
	const std::string s = strip(text);
	char* end = nullptr;
	const double v = std::strtod(s.c_str(), &end);
	if (s.empty() || end != s.c_str() + s.size())
		throw DomainError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
	return v;
}

long long parse_integer(const std::string& text, std::size_t line_no)
{
	const std::string s = strip(text);
	char* end = nullptr;
	const long long v = std::strtoll(s.c_str(), &end, 10);
	if (s.empty() || end != s.c_str() + s.size())
		throw DomainError("line " + std::to_string(line_no) + ": '" + s + "' is not an integer");
	return v;
}

std::ifstream open_input(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw DomainError("cannot open " + path.string());
	return in;
}

} // namespace

std::vector<TimeSeriesRecord> read_series(const std::filesystem::path& path, const std::optional<OrdinalScale>& scale)
{
	auto in = open_input(path);
	std::string line;
	if (!std::getline(in, line))
		throw DomainError(path.string() + ": missing header row");
	auto header = split_csv(line);
	for (auto& h : header)
		h = strip(h);
	if (header.size() < 2 || header.front() != "timestamp")
		throw DomainError(path.string() + ": header must start with 'timestamp'");
	const std::string last = header.back();
	const bool raw = last == "raw_value";
	if (!raw && last != "label")
		throw DomainError(path.string() + ": last column must be 'raw_value' or 'label'");
	if (raw && !(scale && scale->has_thresholds()))
		throw DomainError(path.string() + ": raw_value column requires a scale with thresholds");
	const std::size_t feature_dim = header.size() - 2;

	std::vector<TimeSeriesRecord> series;
	std::size_t line_no = 1;
	while (std::getline(in, line)) {
		++line_no;
		if (strip(line).empty())
			continue;
		const auto cells = split_csv(strip(line));
		if (cells.size() != header.size())
			throw DomainError(path.string() + ": line " + std::to_string(line_no) + " has " +
			                  std::to_string(cells.size()) + " columns, expected " + std::to_string(header.size()));
		TimeSeriesRecord rec;
		rec.timestamp = parse_integer(cells[0], line_no);
		if (!series.empty() && rec.timestamp <= series.back().timestamp)
			throw DomainError(path.string() + ": line " + std::to_string(line_no) +
			                  " has a timestamp that does not increase");
		rec.features.resize(feature_dim);
		for (std::size_t f = 0; f < feature_dim; ++f)
			rec.features[f] = parse_real(cells[f + 1], line_no);
		if (raw) {
			rec.raw_value = parse_real(cells.back(), line_no);
			try {
				rec.label = discretize(*rec.raw_value, *scale);
			} catch (const DomainError& e) {
				throw DomainError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
			}
		} else {
			const auto rank = parse_integer(cells.back(), line_no);
			if (rank < 1 || (scale && rank > scale->num_classes()))
				throw DomainError(path.string() + ": line " + std::to_string(line_no) + ": label " +
				                  std::to_string(rank) + " outside the scale");
			rec.label = OrdinalLabel(static_cast<int>(rank));
		}
		series.push_back(std::move(rec));
	}
	return series;
}

void write_series(const std::filesystem::path& path, const std::vector<TimeSeriesRecord>& series,
                  const std::vector<std::string>& feature_names, bool raw)
{
	const std::size_t dim = series.empty() ? feature_names.size() : series.front().features.size();
	if (!feature_names.empty() && feature_names.size() != dim)
		throw DomainError("feature name count does not match the series");
	if (raw)
		for (const auto& r : series)
			if (!r.raw_value)
				throw DomainError("raw output requested but a record has no raw value");

	std::ostringstream out;
	out << "timestamp";
	for (std::size_t f = 0; f < dim; ++f)
		out << ',' << (feature_names.empty() ? "x" + std::to_string(f + 1) : feature_names[f]);
	out << (raw ? ",raw_value\n" : ",label\n");
	for (const auto& r : series) {
		out << r.timestamp;
		for (double v : r.features)
			out << ',' << format_double(v);
		if (raw)
			out << ',' << format_double(*r.raw_value) << '\n';
		else
			out << ',' << r.label.rank() << '\n';
	}
	write_file_atomically(path, out.str());
}

void write_windows(const std::filesystem::path& path, const WindowedDataset& ds)
{
	std::ostringstream out;
	out << "origin_t,current_label,target";
	for (std::size_t i = 0; i < ds.input_dim(); ++i)
		out << ",z" << i;
	out << '\n';
	for (const auto& p : ds.patterns) {
		out << p.origin_t << ',' << p.current_label.rank() << ',' << p.target.rank();
		for (double v : p.z)
			out << ',' << format_double(v);
		out << '\n';
	}
	write_file_atomically(path, out.str());
}

namespace {

std::string report_header(int q)
{
	std::string h = "method,split,repeat,hidden_units,iterations,lambda,acc,amae,mmae,gms";
	for (const char* prefix : {"mae_c", "sens_c", "n_c"})
		for (int c = 1; c <= q; ++c)
			h += "," + std::string(prefix) + std::to_string(c);
	return h;
}

} // namespace

void write_report(const ExperimentReport& report, const std::filesystem::path& path)
{
	const int q = report.num_classes;
	std::ostringstream out;
	out << report_header(q) << '\n';
	for (const auto& r : report.runs) {
		out << to_string(r.method) << ',' << r.split << ',' << r.repeat << ',' << r.hyper.hidden_units << ','
		    << r.hyper.iterations << ',' << format_double(r.hyper.lambda) << ',' << format_double(r.report.acc) << ','
		    << format_double(r.report.amae) << ',' << format_double(r.report.mmae) << ','
		    << format_double(r.report.gms);
		for (double v : r.report.per_class_mae)
			out << ',' << format_double(v);
		for (double v : r.report.per_class_sensitivity)
			out << ',' << format_double(v);
		for (std::size_t n : r.report.n_per_class)
			out << ',' << n;
		out << '\n';
	}
	for (const auto& s : report.summarize()) {
		out << to_string(s.method) << ",all,mean,,," << ',' << format_double(s.acc) << ',' << format_double(s.amae)
		    << ',' << format_double(s.mmae) << ',' << format_double(s.gms);
		for (int c = 0; c < 3 * q; ++c)
			out << ',';
		out << '\n';
	}
	write_file_atomically(path, out.str());
}

ExperimentReport read_report(const std::filesystem::path& path)
{
	auto in = open_input(path);
	std::string line;
	if (!std::getline(in, line))
		throw DomainError(path.string() + ": missing header row");
	const auto header = split_csv(strip(line));
	if (header.size() < 10 || (header.size() - 10) % 3 != 0)
		throw DomainError(path.string() + ": not a report file");
	ExperimentReport report;
	report.num_classes = static_cast<int>((header.size() - 10) / 3);
	if (strip(line) != report_header(report.num_classes))
		throw DomainError(path.string() + ": unexpected report header");
	const auto q = static_cast<std::size_t>(report.num_classes);

	std::size_t line_no = 1;
	while (std::getline(in, line)) {
		++line_no;
		const auto cells = split_csv(strip(line));
		if (cells.size() != header.size())
			throw DomainError(path.string() + ": line " + std::to_string(line_no) + " has the wrong column count");
		if (cells[1] == "all")
			continue;
		RunRecord r;
		r.method = parse_method(cells[0]);
		r.split = static_cast<int>(parse_integer(cells[1], line_no));
		r.repeat = static_cast<int>(parse_integer(cells[2], line_no));
		r.hyper.hidden_units = static_cast<int>(parse_integer(cells[3], line_no));
		r.hyper.iterations = static_cast<int>(parse_integer(cells[4], line_no));
		r.hyper.lambda = parse_real(cells[5], line_no);
		r.report.acc = parse_real(cells[6], line_no);
		r.report.amae = parse_real(cells[7], line_no);
		r.report.mmae = parse_real(cells[8], line_no);
		r.report.gms = parse_real(cells[9], line_no);
		for (std::size_t c = 0; c < q; ++c) {
			r.report.per_class_mae.push_back(parse_real(cells[10 + c], line_no));
			r.report.per_class_sensitivity.push_back(parse_real(cells[10 + q + c], line_no));
			r.report.n_per_class.push_back(static_cast<std::size_t>(parse_integer(cells[10 + 2 * q + c], line_no)));
			if (r.report.n_per_class.back() == 0)
				r.report.missing_classes = true;
		}
		report.runs.push_back(std::move(r));
	}
	return report;
}

void write_summary(const ExperimentReport& report, const std::filesystem::path& path)
{
	std::ostringstream out;
	out << "method,split,acc_mean,acc_sd,amae_mean,amae_sd,mmae_mean,mmae_sd,gms_mean,gms_sd\n";
	for (const auto& m : report.summarize()) {
		for (const auto& s : m.splits)
			out << to_string(m.method) << ',' << s.split << ',' << format_double(s.acc.mean) << ','
			    << format_double(s.acc.stddev) << ',' << format_double(s.amae.mean) << ','
			    << format_double(s.amae.stddev) << ',' << format_double(s.mmae.mean) << ','
			    << format_double(s.mmae.stddev) << ',' << format_double(s.gms.mean) << ','
			    << format_double(s.gms.stddev) << '\n';
		out << to_string(m.method) << ",all," << format_double(m.acc) << ',' << format_double(m.acc_sd) << ','
		    << format_double(m.amae) << ',' << format_double(m.amae_sd) << ',' << format_double(m.mmae) << ','
		    << format_double(m.mmae_sd) << ',' << format_double(m.gms) << ',' << format_double(m.gms_sd) << '\n';
	}
	write_file_atomically(path, out.str());
}

std::string render_table(const ExperimentReport& report)
{
	std::ostringstream out;
	out << std::left << std::setw(8) << "Method" << std::right << std::setw(18) << "Acc" << std::setw(18) << "AMAE"
	    << std::setw(18) << "MMAE" << std::setw(18) << "GM" << '\n';
	auto cell = [&](double mean, double sd, int precision) {
		std::ostringstream c;
		c << std::fixed << std::setprecision(precision) << mean << " (" << sd << ")";
		out << std::setw(18) << c.str();
	};
	for (const auto& m : report.summarize()) {
		out << std::left << std::setw(8) << to_string(m.method) << std::right;
		cell(m.acc, m.acc_sd, 2);
		cell(m.amae, m.amae_sd, 4);
		cell(m.mmae, m.mmae_sd, 4);
		cell(m.gms, m.gms_sd, 2);
		out << '\n';
	}
	return out.str();
}

namespace {

json config_json(const NnpomConfig& c)
{
	return json{{"hidden_units", c.hidden_units}, {"input_dim", c.input_dim}, {"num_classes", c.num_classes}};
}

NnpomConfig config_from(const json& j)
{
	return NnpomConfig{j.at("hidden_units").get<int>(), j.at("input_dim").get<int>(), j.at("num_classes").get<int>()};
}

template <typename F>
auto parse_json_or_throw(const std::string& what, F&& f)
{
	try {
		return f();
	} catch (const json::exception& e) {
		throw DomainError(what + ": " + e.what());
	}
}

} // namespace

std::string params_to_json(const NnpomParams& params)
{
	return json{{"config", config_json(params.config)}, {"parameters", params.flatten()}}.dump(1, '\t');
}

NnpomParams nnpom_params_from_json(const std::string& text)
{
	return parse_json_or_throw("network parameters", [&] {
		const auto j = json::parse(text);
		return NnpomParams::unflatten(config_from(j.at("config")), j.at("parameters").get<std::vector<double>>());
	});
}

std::string params_to_json(const MixtureParams& params)
{
	return json{{"config", config_json(params.expert.config)}, {"parameters", params.flatten()}}.dump(1, '\t');
}

MixtureParams mixture_params_from_json(const std::string& text)
{
	return parse_json_or_throw("mixture parameters", [&] {
		const auto j = json::parse(text);
		return MixtureParams::unflatten(config_from(j.at("config")), j.at("parameters").get<std::vector<double>>());
	});
}

void save_model(const std::filesystem::path& path, const ModelBundle& b)
{
	const FittedModel& m = b.model;
	json j;
	j["method"] = std::string(to_string(m.method));
	j["num_classes"] = b.num_classes;
	j["thresholds"] = b.thresholds;
	j["delta"] = b.delta;
	j["horizon"] = b.horizon;
	j["standardization"] = {{"mean", b.standardization.mean}, {"stddev", b.standardization.stddev}};
	j["hyperparameters"] = {{"hidden_units", m.hyper.hidden_units},
	                        {"iterations", m.hyper.iterations},
	                        {"lambda", m.hyper.lambda}};
	j["seed"] = m.seed;
	j["final_loss"] = m.final_loss;
	j["warnings"] = m.warnings;
	if (m.mixture) {
		j["config"] = config_json(m.mixture->expert.config);
		j["parameters"] = m.mixture->flatten();
	} else if (m.network) {
		j["config"] = config_json(m.network->config);
		j["parameters"] = m.network->flatten();
	} else if (m.linear) {
		j["config"] = {{"input_dim", m.linear->input_dim}, {"num_classes", m.linear->num_classes}};
		j["parameters"] = m.linear->flatten();
	}
	write_file_atomically(path, j.dump(1, '\t') + "\n");
}

ModelBundle load_model(const std::filesystem::path& path)
{
	auto in = open_input(path);
	std::stringstream buf;
	buf << in.rdbuf();
	return parse_json_or_throw(path.string(), [&] {
		const auto j = json::parse(buf.str());
		ModelBundle b;
		b.model.method = parse_method(j.at("method").get<std::string>());
		b.num_classes = j.at("num_classes").get<int>();
		b.thresholds = j.at("thresholds").get<std::vector<double>>();
		b.delta = j.at("delta").get<int>();
		b.horizon = j.at("horizon").get<int>();
		b.standardization.mean = j.at("standardization").at("mean").get<std::vector<double>>();
		b.standardization.stddev = j.at("standardization").at("stddev").get<std::vector<double>>();
		const auto& h = j.at("hyperparameters");
		b.model.hyper = {h.at("hidden_units").get<int>(), h.at("iterations").get<int>(), h.at("lambda").get<double>()};
		b.model.seed = j.at("seed").get<std::uint64_t>();
		b.model.final_loss = j.at("final_loss").get<double>();
		b.model.warnings = j.at("warnings").get<std::vector<std::string>>();
		if (b.model.method != Method::Persist) {
			const auto flat = j.at("parameters").get<std::vector<double>>();
			const auto& c = j.at("config");
			switch (b.model.method) {
			case Method::POM:
				b.model.linear =
				    PomParams::unflatten(c.at("input_dim").get<int>(), c.at("num_classes").get<int>(), flat);
				break;
			case Method::NNPOM: b.model.network = NnpomParams::unflatten(config_from(c), flat); break;
			default: b.model.mixture = MixtureParams::unflatten(config_from(c), flat); break;
			}
		}
		return b;
	});
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
	if (!obj.is_object())
		throw DomainError("'" + where + "' must be an object");
	for (const auto& [key, value] : obj.items())
		if (!allowed.count(key))
			throw DomainError("unknown configuration key '" + (where.empty() ? key : where + "." + key) + "'");
}

GenConfig gen_config_from(const json& g)
{
	reject_unknown(g, {"num_steps", "num_classes", "feature_dim", "base_persistence", "switch_signal_strength",
	                   "class_marginals", "gap_probability", "seed"},
	               "generator");
	GenConfig c;
	c.num_steps = g.value("num_steps", c.num_steps);
	c.num_classes = g.value("num_classes", c.num_classes);
	c.feature_dim = g.value("feature_dim", c.feature_dim);
	c.base_persistence = g.value("base_persistence", c.base_persistence);
	c.switch_signal_strength = g.value("switch_signal_strength", c.switch_signal_strength);
	c.class_marginals = g.value("class_marginals", c.class_marginals);
	c.gap_probability = g.value("gap_probability", c.gap_probability);
	c.seed = g.value("seed", c.seed);
	c.validate();
	return c;
}

} // namespace

GenConfig parse_gen_config(const std::string& json_text)
{
	return parse_json_or_throw("generator configuration", [&] { return gen_config_from(json::parse(json_text)); });
}

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir)
{
	return parse_json_or_throw("experiment configuration", [&] {
		const auto j = json::parse(json_text);
		reject_unknown(j, {"method", "delta", "horizon", "grid", "repeats", "seed", "cv_folds", "selection_metric",
		                   "threads", "splits", "test_fraction", "data", "generator"},
		               "");
		ExperimentConfig cfg;
		if (!j.contains("method"))
			throw DomainError("configuration key 'method' is required");
		const auto& m = j.at("method");
		auto add_method = [&](const json& v) {
			try {
				cfg.methods.push_back(parse_method(v.get<std::string>()));
			} catch (const DomainError& e) {
				throw DomainError(std::string("configuration key 'method': ") + e.what());
			}
		};
		if (m.is_array())
			for (const auto& v : m)
				add_method(v);
		else
			add_method(m);
		if (cfg.methods.empty())
			throw DomainError("configuration key 'method' lists no methods");
		cfg.spec.method = cfg.methods.front();

		cfg.delta = j.value("delta", cfg.delta);
		cfg.horizon = j.value("horizon", cfg.horizon);
		if (cfg.delta < 0)
			throw DomainError("configuration key 'delta' must be non-negative");
		if (cfg.horizon < 1)
			throw DomainError("configuration key 'horizon' must be at least 1");
		if (j.contains("grid")) {
			const auto& g = j.at("grid");
			reject_unknown(g, {"m", "iter", "lambda"}, "grid");
			cfg.spec.grid.hidden_units = g.value("m", cfg.spec.grid.hidden_units);
			cfg.spec.grid.iterations = g.value("iter", cfg.spec.grid.iterations);
			cfg.spec.grid.lambdas = g.value("lambda", cfg.spec.grid.lambdas);
		}
		cfg.spec.repeats = j.value("repeats", cfg.spec.repeats);
		cfg.spec.seed = j.value("seed", cfg.spec.seed);
		cfg.spec.cv_folds = j.value("cv_folds", cfg.spec.cv_folds);
		cfg.spec.threads = j.value("threads", cfg.spec.threads);
		if (j.contains("selection_metric")) {
			try {
				cfg.spec.selection_metric = parse_selection_metric(j.at("selection_metric").get<std::string>());
			} catch (const DomainError& e) {
				throw DomainError(std::string("configuration key 'selection_metric': ") + e.what());
			}
		}
		cfg.spec.validate();
		cfg.splits = j.value("splits", cfg.splits);
		cfg.test_fraction = j.value("test_fraction", cfg.test_fraction);
		if (cfg.splits < 1)
			throw DomainError("configuration key 'splits' must be at least 1");

		if (j.contains("data") == j.contains("generator"))
			throw DomainError("configuration needs exactly one of 'data' or 'generator'");
		if (j.contains("data")) {
			const auto& d = j.at("data");
			reject_unknown(d, {"path", "thresholds", "num_classes"}, "data");
			std::filesystem::path p = d.at("path").get<std::string>();
			cfg.data.path = p.is_absolute() ? p : base_dir / p;
			cfg.data.thresholds = d.value("thresholds", std::vector<double>{});
			cfg.data.num_classes = d.value("num_classes", 0);
			if (cfg.data.thresholds.empty() == (cfg.data.num_classes == 0))
				throw DomainError("'data' needs exactly one of 'thresholds' or 'num_classes'");
		} else {
			cfg.data.generator = gen_config_from(j.at("generator"));
			cfg.data.num_classes = cfg.data.generator->num_classes;
		}
		return cfg;
	});
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path)
{
	auto in = open_input(path);
	std::stringstream buf;
	buf << in.rdbuf();
	return parse_experiment_config(buf.str(), path.parent_path());
}

} // namespace pgmoe
