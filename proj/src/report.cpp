#include "bbo/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "bbo/errors.hpp"
#include "bbo/moo.hpp"

namespace bbo {

Series convergence_curve(const History& history)
{
    if (history.num_objectives() != 1)
        throw WrongTaskTypeError("convergence curve needs a single-objective history");
    Series out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& o = history[i];
        if (o.is_success() && o.is_feasible()) best = std::min(best, o.objectives.front());
        if (std::isfinite(best)) out.emplace_back(i + 1, best);
    }
    return out;
}

Series hv_over_time(const History& history, const std::vector<double>& ref_point)
{
    if (history.num_objectives() < 2)
        throw WrongTaskTypeError("hypervolume needs a multi-objective history");
    if (ref_point.size() != history.num_objectives())
        throw ObservationShapeError("ref_point length does not match the number of objectives");
    Series out;
    std::vector<moo::Point> front;
    double hv = 0.0;
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& o = history[i];
        if (o.is_success() && o.is_feasible()) {
            front.push_back(o.objectives);
            front = moo::non_dominated(front);
            hv = moo::hypervolume(front, ref_point);
        }
        out.emplace_back(i + 1, hv);
    }
    return out;
}

RowShapley shapley_row(const std::function<double(const Eigen::VectorXd&)>& f,
                       const Eigen::MatrixXd& background, const Eigen::VectorXd& x,
                       std::size_t n_permutations, Rng& rng)
{
    const auto d = x.size();
    const auto B = static_cast<std::size_t>(background.rows());
    if (B == 0) throw InsufficientDataError("Shapley estimation needs a nonempty background set");
    if (n_permutations == 0) throw ConfigurationError("n_permutations must be positive");

    std::vector<double> bg_pred(B);
    for (std::size_t b = 0; b < B; ++b) bg_pred[b] = f(background.row(static_cast<Eigen::Index>(b)).transpose());
    const double bg_mean = std::accumulate(bg_pred.begin(), bg_pred.end(), 0.0) / static_cast<double>(B);

    RowShapley out;
    out.phi = Eigen::VectorXd::Zero(d);
    out.prediction = f(x);

    // Background rows are drawn in shuffled round-robin order, so every full
    // cycle reproduces the background mean exactly.
    std::vector<std::size_t> bg_order(B);
    std::iota(bg_order.begin(), bg_order.end(), 0);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    Eigen::VectorXd v(d);
    for (std::size_t t = 0; t < n_permutations; ++t) {
        if (t % B == 0) std::shuffle(bg_order.begin(), bg_order.end(), rng);
        std::shuffle(perm.begin(), perm.end(), rng);
        const std::size_t b = bg_order[t % B];
        v = background.row(static_cast<Eigen::Index>(b)).transpose();
        double prev = bg_pred[b];
        for (std::size_t k = 0; k < perm.size(); ++k) {
            const auto j = perm[k];
            v[j] = x[j];
            const double cur = k + 1 == perm.size() ? out.prediction : f(v);
            out.phi[j] += cur - prev;
            prev = cur;
        }
    }
    out.phi /= static_cast<double>(n_permutations);
    out.efficiency_residual = out.phi.sum() - (out.prediction - bg_mean);

    // Only the trailing partial cycle, r rows drawn without replacement,
    // contributes sampling error to the residual.
    const double r = static_cast<double>(n_permutations % B);
    if (r > 0 && B > 1) {
        double ss = 0.0;
        for (double p : bg_pred) ss += (p - bg_mean) * (p - bg_mean);
        const double s2 = ss / static_cast<double>(B - 1);
        out.residual_std_error =
            std::sqrt(r * (1.0 - r / static_cast<double>(B)) * s2) / static_cast<double>(n_permutations);
    }
    return out;
}

namespace {

std::vector<std::size_t> pick_rows(std::size_t n, std::size_t k, Rng& rng)
{
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    if (k >= n) return all;
    std::vector<std::size_t> out;
    out.reserve(k);
    std::sample(all.begin(), all.end(), std::back_inserter(out), k, rng);
    return out;
}

} // namespace

ImportanceResult importance_shapley(const History& history, Rng& rng, const ShapleyOptions& options)
{
    const auto& space = history.space();
    if (!space) throw InsufficientDataError("importance needs a history that carries its search space");
    if (options.objective_index >= history.num_objectives())
        throw ConfigurationError("objective_index out of range");
    const std::size_t d = space->dimension();
    const std::size_t need = std::max<std::size_t>(2 * d, 2);
    if (history.success_count() < need)
        throw InsufficientDataError(fmt::format("importance needs at least {} successful observations, have {}",
                                                need, history.success_count()));

    auto data = history.training_targets(*space, Encoding::Index, FailureStrategy::Drop);
    const auto& y = data.objectives[options.objective_index];
    const auto model = fit_prf(data.X, y, rng, options.prf);
    auto f = [&model](const Eigen::VectorXd& v) { return model.predict(v).mean; };

    const auto n = static_cast<std::size_t>(data.X.rows());
    const auto bg_rows = pick_rows(n, options.background_size, rng);
    Eigen::MatrixXd background(static_cast<Eigen::Index>(bg_rows.size()), data.X.cols());
    for (std::size_t i = 0; i < bg_rows.size(); ++i)
        background.row(static_cast<Eigen::Index>(i)) = data.X.row(static_cast<Eigen::Index>(bg_rows[i]));

    ImportanceResult out;
    for (const auto& p : space->parameters()) out.names.push_back(p.name());
    out.importance.assign(d, 0.0);
    double base = 0.0;
    for (Eigen::Index i = 0; i < background.rows(); ++i) base += f(background.row(i).transpose());
    out.baseline = base / static_cast<double>(background.rows());

    for (std::size_t r : pick_rows(n, options.explicand_count, rng)) {
        auto row = shapley_row(f, background, data.X.row(static_cast<Eigen::Index>(r)).transpose(),
                               options.n_permutations, rng);
        for (std::size_t j = 0; j < d; ++j) out.importance[j] += std::abs(row.phi[static_cast<Eigen::Index>(j)]);
        out.rows.push_back(std::move(row));
    }
    for (auto& v : out.importance) v /= static_cast<double>(out.rows.size());
    return out;
}

ReportAnalyses analyze(const History& history, std::uint64_t seed)
{
    ReportAnalyses a;
    if (history.num_objectives() == 1) {
        a.convergence = convergence_curve(history);
    } else if ((a.hv_ref_point = history.effective_ref_point())) {
        a.hypervolume = hv_over_time(history, *a.hv_ref_point);
    }
    if (history.space()) {
        Rng rng(seed);
        try {
            a.importance = importance_shapley(history, rng);
        } catch (const InsufficientDataError&) {
        } catch (const NumericError&) {
        }
    }
    return a;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Json number_array(const std::vector<double>& v)
{
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

Json history_to_json(const History& h)
{
    Json j;
    j["version"] = "1";
    j["task_id"] = h.task_id();
    j["num_objectives"] = h.num_objectives();
    j["num_constraints"] = h.num_constraints();
    j["ref_point"] = h.ref_point() ? number_array(*h.ref_point()) : Json(nullptr);
    j["search_space"] = h.space() ? space_to_json(*h.space()) : Json(nullptr);
    Json obs = Json::array();
    for (const auto& o : h.observations()) {
        Json r;
        r["config"] = config_to_json(o.config);
        r["objectives"] = number_array(o.objectives);
        r["constraints"] = number_array(o.constraints);
        r["trial_state"] = to_string(o.trial_state);
        r["elapsed_time"] = o.elapsed_time;
        Json extra = Json::object();
        for (const auto& [k, v] : o.extra) extra[k] = v;
        r["extra"] = std::move(extra);
        obs.push_back(std::move(r));
    }
    j["observations"] = std::move(obs);
    return j;
}

const Json& field(const Json& obj, const char* name, const std::string& where)
{
    if (!obj.contains(name)) throw ParseError(fmt::format("{}: missing field '{}'", where, name));
    return obj[name];
}

std::size_t read_count(const Json& j, const std::string& where)
{
    if (!j.is_number_unsigned()) throw ParseError(fmt::format("{}: expected a non-negative integer", where));
    return j.get<std::size_t>();
}

std::vector<double> read_numbers(const Json& j, const std::string& where)
{
    if (!j.is_array()) throw ParseError(fmt::format("{}: expected an array of numbers", where));
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError(fmt::format("{}[{}]: expected a number", where, i));
        out.push_back(j[i].get<double>());
    }
    return out;
}

void check_fields(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where)
{
    for (const auto& [key, _] : obj.items())
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ParseError(fmt::format("{}: unknown field '{}'", where, key));
}

} // namespace

std::string export_json(const History& history)
{
    return history_to_json(history).dump(2) + "\n";
}

History import_json(const std::string& text)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::string msg = e.what();
        if (auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
        throw ParseError("history: " + msg);
    }
    if (!j.is_object()) throw ParseError("history: expected a JSON object");
    check_fields(j, {"version", "task_id", "num_objectives", "num_constraints", "ref_point", "search_space",
                     "observations"},
                 "history");
    const auto& version = field(j, "version", "history");
    if (!version.is_string() || version.get<std::string>() != "1")
        throw ParseError(fmt::format("history.version: unsupported version {}", version.dump()));
    const auto& task_id = field(j, "task_id", "history");
    if (!task_id.is_string()) throw ParseError("history.task_id: expected a string");
    const std::size_t m = read_count(field(j, "num_objectives", "history"), "history.num_objectives");
    const std::size_t p = read_count(field(j, "num_constraints", "history"), "history.num_constraints");
    if (m < 1) throw ParseError("history.num_objectives: must be at least 1");

    std::optional<std::vector<double>> ref;
    if (j.contains("ref_point") && !j["ref_point"].is_null())
        ref = read_numbers(j["ref_point"], "history.ref_point");
    std::shared_ptr<const SearchSpace> space;
    if (j.contains("search_space") && !j["search_space"].is_null()) {
        try {
            space = std::make_shared<const SearchSpace>(space_from_json(j["search_space"]));
        } catch (const ParseError& e) {
            throw ParseError(fmt::format("history.search_space: {}", e.what()));
        }
    }

    History h(task_id.get<std::string>(), m, p, std::nullopt, space);
    try {
        h.set_ref_point(ref);
    } catch (const ObservationShapeError& e) {
        throw ParseError(fmt::format("history.ref_point: {}", e.what()));
    }

    const auto& obs = field(j, "observations", "history");
    if (!obs.is_array()) throw ParseError("history.observations: expected an array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const std::string where = fmt::format("history.observations[{}]", i);
        const auto& r = obs[i];
        if (!r.is_object()) throw ParseError(where + ": expected an object");
        check_fields(r, {"config", "objectives", "constraints", "trial_state", "elapsed_time", "extra"}, where);
        Observation o;
        try {
            o.config = config_from_json(field(r, "config", where), space.get());
        } catch (const ParseError& e) {
            throw ParseError(fmt::format("{}.{}", where, e.what()));
        }
        o.objectives = read_numbers(field(r, "objectives", where), where + ".objectives");
        o.constraints = read_numbers(field(r, "constraints", where), where + ".constraints");
        const auto& state = field(r, "trial_state", where);
        if (!state.is_string()) throw ParseError(where + ".trial_state: expected a string");
        try {
            o.trial_state = trial_state_from_string(state.get<std::string>());
        } catch (const ParseError& e) {
            throw ParseError(fmt::format("{}.trial_state: {}", where, e.what()));
        }
        const auto& elapsed = field(r, "elapsed_time", where);
        if (!elapsed.is_number()) throw ParseError(where + ".elapsed_time: expected a number");
        o.elapsed_time = elapsed.get<double>();
        if (r.contains("extra")) {
            const auto& extra = r["extra"];
            if (!extra.is_object()) throw ParseError(where + ".extra: expected an object");
            for (const auto& [k, v] : extra.items()) {
                if (!v.is_string()) throw ParseError(fmt::format("{}.extra.{}: expected a string", where, k));
                o.extra[k] = v.get<std::string>();
            }
        }
        try {
            h.record(std::move(o));
        } catch (const ObservationShapeError& e) {
            throw ParseError(fmt::format("{}: {}", where, e.what()));
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// HTML

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&#39;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v)
{
    return fmt::format("{:.6g}", v);
}

std::string px(double v)
{
    return fmt::format("{:.2f}", v);
}

struct Range {
    double lo, hi;
};

Range padded(double lo, double hi)
{
    if (!(hi > lo)) {
        const double w = std::max(1.0, std::abs(lo)) * 0.5;
        return {lo - w, hi + w};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

constexpr double kWidth = 640, kHeight = 320, kLeft = 72, kRight = 16, kTop = 16, kBottom = 44;

class Chart {
public:
    Chart(std::string label, std::string x_label, std::string y_label, Range x, Range y)
        : label_(std::move(label)), x_label_(std::move(x_label)), y_label_(std::move(y_label)), x_(x), y_(y)
    {
    }

    double sx(double v) const { return kLeft + (v - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
    double sy(double v) const { return kHeight - kBottom - (v - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }

    void points(const std::vector<std::pair<double, double>>& pts, const std::string& cls)
    {
        for (const auto& [x, y] : pts)
            body_ += fmt::format("<circle class=\"{}\" cx=\"{}\" cy=\"{}\" r=\"3\" />\n", cls, px(sx(x)), px(sy(y)));
    }

    /// Staircase through the points in the given order (horizontal, then vertical).
    void steps(const std::vector<std::pair<double, double>>& pts, const std::string& cls, double extend_to)
    {
        if (pts.empty()) return;
        std::string d = fmt::format("M{},{}", px(sx(pts[0].first)), px(sy(pts[0].second)));
        for (std::size_t i = 1; i < pts.size(); ++i) {
            d += fmt::format(" H{}", px(sx(pts[i].first)));
            d += fmt::format(" V{}", px(sy(pts[i].second)));
        }
        d += fmt::format(" H{}", px(sx(extend_to)));
        body_ += fmt::format("<path class=\"{}\" d=\"{}\" />\n", cls, d);
    }

    std::string svg() const
    {
        std::string s = fmt::format(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
            "role=\"img\" aria-label=\"{2}\">\n",
            kWidth, kHeight, escape(label_));
        const double x0 = kLeft, x1 = kWidth - kRight, y0 = kTop, y1 = kHeight - kBottom;
        s += fmt::format("<rect class=\"frame\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" />\n", px(x0), px(y0),
                         px(x1 - x0), px(y1 - y0));
        for (int i = 0; i <= 4; ++i) {
            const double xv = x_.lo + (x_.hi - x_.lo) * i / 4.0;
            const double yv = y_.lo + (y_.hi - y_.lo) * i / 4.0;
            s += fmt::format("<text class=\"tick\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                             px(sx(xv)), px(y1 + 16), escape(fmt::format("{:.4g}", xv)));
            s += fmt::format("<text class=\"tick\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", px(x0 - 6),
                             px(sy(yv) + 4), escape(fmt::format("{:.4g}", yv)));
        }
        s += fmt::format("<text class=\"axis\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                         px((x0 + x1) / 2), px(kHeight - 6), escape(x_label_));
        s += fmt::format("<text class=\"axis\" x=\"12\" y=\"{}\" text-anchor=\"middle\" "
                         "transform=\"rotate(-90 12 {})\">{}</text>\n",
                         px((y0 + y1) / 2), px((y0 + y1) / 2), escape(y_label_));
        s += body_;
        s += "</svg>\n";
        return s;
    }

private:
    std::string label_, x_label_, y_label_;
    Range x_, y_;
    std::string body_;
};

Range range_of(const std::vector<std::pair<double, double>>& pts, bool second)
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : pts) {
        const double v = second ? p.second : p.first;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return padded(lo, hi);
}

std::string convergence_section(const History& h, const Series& curve)
{
    std::string s = "<section id=\"convergence\">\n<h2>Convergence</h2>\n";
    std::vector<std::pair<double, double>> feasible, infeasible, best;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const auto& o = h[i];
        if (!o.is_success()) continue;
        (o.is_feasible() ? feasible : infeasible).emplace_back(static_cast<double>(i + 1), o.objectives[0]);
    }
    for (const auto& [i, v] : curve) best.emplace_back(static_cast<double>(i), v);
    auto all = feasible;
    all.insert(all.end(), infeasible.begin(), infeasible.end());
    all.insert(all.end(), best.begin(), best.end());
    if (all.empty()) return s + "<p class=\"empty\">No successful observations yet.</p>\n</section>\n";

    Chart c("Objective value per trial with the best value so far", "trial", "objective",
            padded(1.0, static_cast<double>(std::max<std::size_t>(h.size(), 1))), range_of(all, true));
    c.points(feasible, "pt");
    c.points(infeasible, "pt infeasible");
    c.steps(best, "best", static_cast<double>(h.size()));
    return s + c.svg() + "</section>\n";
}

std::string pareto_section(const History& h)
{
    std::string s = "<section id=\"pareto\">\n<h2>Pareto front</h2>\n";
    if (h.num_objectives() > 2) s += "<p class=\"note\">Showing the first two objectives.</p>\n";
    std::vector<std::pair<double, double>> feasible, infeasible, front;
    for (const auto& o : h.observations()) {
        if (!o.is_success()) continue;
        (o.is_feasible() ? feasible : infeasible).emplace_back(o.objectives[0], o.objectives[1]);
    }
    for (const auto& o : h.pareto_front()) front.emplace_back(o.objectives[0], o.objectives[1]);
    std::sort(front.begin(), front.end());
    auto all = feasible;
    all.insert(all.end(), infeasible.begin(), infeasible.end());
    if (all.empty()) return s + "<p class=\"empty\">No successful observations yet.</p>\n</section>\n";

    Chart c("Objective values with the Pareto front highlighted", "objective 1", "objective 2",
            range_of(all, false), range_of(all, true));
    c.points(feasible, "pt");
    c.points(infeasible, "pt infeasible");
    c.points(front, "pt front");
    return s + c.svg() + "</section>\n";
}

std::string hypervolume_section(const History& h, const ReportAnalyses& a)
{
    std::string s = "<section id=\"hypervolume\">\n<h2>Hypervolume</h2>\n";
    if (a.hypervolume.empty()) return s + "<p class=\"empty\">No hypervolume series available.</p>\n</section>\n";
    if (a.hv_ref_point) {
        std::string ref;
        for (double v : *a.hv_ref_point) ref += (ref.empty() ? "" : ", ") + num(v);
        s += "<p class=\"note\">Reference point (" + escape(ref) + ").</p>\n";
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& [i, v] : a.hypervolume) pts.emplace_back(static_cast<double>(i), v);
    Chart c("Hypervolume of the feasible front after each trial", "trial", "hypervolume",
            padded(1.0, static_cast<double>(h.size())), range_of(pts, true));
    c.steps(pts, "best", static_cast<double>(h.size()));
    return s + c.svg() + "</section>\n";
}

std::string importance_section(const ImportanceResult& imp)
{
    std::string s = "<section id=\"importance\">\n<h2>Parameter importance</h2>\n";
    s += "<p class=\"note\">Mean absolute Shapley value of the surrogate prediction.</p>\n";
    std::vector<std::size_t> order(imp.names.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return imp.importance[a] > imp.importance[b]; });
    const double top = imp.importance.empty() ? 0.0 : *std::max_element(imp.importance.begin(), imp.importance.end());
    const double bar_h = 20, gap = 6, label_w = 160, max_w = 380;
    const double height = static_cast<double>(order.size()) * (bar_h + gap) + gap;
    s += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
                     "viewBox=\"0 0 {0} {1}\" role=\"img\" aria-label=\"Parameter importance\">\n",
                     kWidth, px(height));
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t j = order[r];
        const double y = gap + static_cast<double>(r) * (bar_h + gap);
        const double w = top > 0 ? imp.importance[j] / top * max_w : 0.0;
        s += fmt::format("<text class=\"tick\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", px(label_w - 8),
                         px(y + 14), escape(imp.names[j]));
        s += fmt::format("<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" />\n", px(label_w),
                         px(y), px(w), px(bar_h));
        s += fmt::format("<text class=\"tick\" x=\"{}\" y=\"{}\">{}</text>\n", px(label_w + w + 6), px(y + 14),
                         escape(fmt::format("{:.4g}", imp.importance[j])));
    }
    return s + "</svg>\n</section>\n";
}

std::vector<std::string> parameter_names(const History& h)
{
    std::vector<std::string> names;
    if (h.space()) {
        for (const auto& p : h.space()->parameters()) names.push_back(p.name());
    } else if (!h.empty()) {
        for (const auto& [name, _] : h[0].config.values()) names.push_back(name);
    }
    return names;
}

std::string table_section(const History& h)
{
    const auto names = parameter_names(h);
    const std::size_t m = h.num_objectives(), p = h.num_constraints();
    std::string s = "<section id=\"observations\">\n<h2>Observations</h2>\n<table class=\"observations\">\n<thead>\n<tr>";
    s += "<th>#</th><th>state</th>";
    for (const auto& n : names) s += "<th>" + escape(n) + "</th>";
    for (std::size_t k = 0; k < m; ++k) s += fmt::format("<th>f{}</th>", k + 1);
    for (std::size_t k = 0; k < p; ++k) s += fmt::format("<th>c{}</th>", k + 1);
    s += "<th>elapsed (s)</th></tr>\n</thead>\n<tbody>\n";
    for (std::size_t i = 0; i < h.size(); ++i) {
        const auto& o = h[i];
        std::string cls = "obs";
        if (!o.is_success()) cls += " failed";
        else if (!o.is_feasible()) cls += " infeasible";
        s += fmt::format("<tr class=\"{}\"><td>{}</td><td>{}</td>", cls, i + 1, to_string(o.trial_state));
        for (const auto& n : names) {
            const Value* v = o.config.find(n);
            s += "<td>" + (v ? escape(to_string(*v)) : std::string()) + "</td>";
        }
        for (std::size_t k = 0; k < m; ++k)
            s += "<td>" + (k < o.objectives.size() ? num(o.objectives[k]) : std::string()) + "</td>";
        for (std::size_t k = 0; k < p; ++k)
            s += "<td>" + (k < o.constraints.size() ? num(o.constraints[k]) : std::string()) + "</td>";
        s += "<td>" + fmt::format("{:.3f}", o.elapsed_time) + "</td></tr>\n";
    }
    return s + "</tbody>\n</table>\n</section>\n";
}

std::string summary_section(const History& h)
{
    std::size_t failed = 0, timeout = 0;
    for (const auto& o : h.observations()) {
        failed += o.trial_state == TrialState::Failed;
        timeout += o.trial_state == TrialState::Timeout;
    }
    std::vector<std::pair<std::string, std::string>> rows = {
        {"Task", h.task_id()},
        {"Objectives", std::to_string(h.num_objectives())},
        {"Constraints", std::to_string(h.num_constraints())},
        {"Observations", std::to_string(h.size())},
        {"Successful", std::to_string(h.success_count())},
        {"Failed", std::to_string(failed)},
        {"Timed out", std::to_string(timeout)},
    };
    if (h.num_objectives() == 1) {
        if (auto inc = h.incumbent()) {
            rows.emplace_back("Best objective", num(inc->objectives[0]));
            std::string cfg;
            for (const auto& [n, v] : inc->config.values()) cfg += (cfg.empty() ? "" : ", ") + n + "=" + to_string(v);
            rows.emplace_back("Best configuration", cfg);
        }
    } else {
        rows.emplace_back("Pareto front size", std::to_string(h.pareto_front().size()));
    }
    std::string s = "<section id=\"summary\">\n<table class=\"summary\">\n<tbody>\n";
    for (const auto& [k, v] : rows) s += "<tr><th>" + escape(k) + "</th><td>" + escape(v) + "</td></tr>\n";
    return s + "</tbody>\n</table>\n</section>\n";
}

constexpr const char* kStyle = R"(body { font-family: sans-serif; margin: 2em; color: #222; }
h1 { font-size: 1.5em; }
h2 { font-size: 1.2em; margin-top: 1.5em; }
table { border-collapse: collapse; font-size: 0.85em; }
th, td { border: 1px solid #ccc; padding: 2px 6px; text-align: left; }
table.observations td { font-family: monospace; }
tr.failed { background: #fde8e8; }
tr.infeasible { background: #fff6dd; }
.frame { fill: none; stroke: #888; }
.tick { font-size: 11px; fill: #444; }
.axis { font-size: 12px; fill: #222; }
.pt { fill: #999; fill-opacity: 0.6; }
.pt.infeasible { fill: none; stroke: #d55; }
.pt.front { fill: #1f6fd1; fill-opacity: 1; }
.best { fill: none; stroke: #1f6fd1; stroke-width: 2; }
.bar { fill: #1f6fd1; }
.note, .empty { color: #555; font-size: 0.9em; }
)";

} // namespace

std::string render_html(const History& history, const ReportAnalyses& analyses)
{
    std::string s = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\" />\n";
    s += "<title>Optimization report: " + escape(history.task_id()) + "</title>\n";
    s += "<style>\n" + std::string(kStyle) + "</style>\n</head>\n<body>\n";
    s += "<h1>Optimization report: " + escape(history.task_id()) + "</h1>\n";
    s += summary_section(history);
    if (history.num_objectives() == 1) {
        s += convergence_section(history, analyses.convergence);
    } else {
        s += pareto_section(history);
        s += hypervolume_section(history, analyses);
    }
    if (analyses.importance) s += importance_section(*analyses.importance);
    s += table_section(history);

    // '<' only occurs inside JSON strings, where < is an equivalent
    // spelling; this keeps "</script>" and "<!--" out of the script body.
    std::string island;
    for (char c : export_json(history)) {
        if (c == '<') island += "\\u003c";
        else island += c;
    }
    s += "<script type=\"application/json\" id=\"bbo-history\">\n" + island + "</script>\n";
    s += "</body>\n</html>\n";
    return s;
}

} // namespace bbo
