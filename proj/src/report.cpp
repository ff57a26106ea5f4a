#include "misclass/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "misclass/errors.hpp"
#include "misclass/version.hpp"

namespace misclass {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json block_json(const std::vector<std::string>& names, const Eigen::VectorXd& values,
                std::size_t offset, Eigen::Index count) {
    if (count == 0) return nullptr;
    json out = json::object();
    for (Eigen::Index j = 0; j < count; ++j)
        out[names[offset + static_cast<std::size_t>(j)]] = values[static_cast<Eigen::Index>(offset) + j];
    return out;
}

json correction_json(const CorrectionReport& report) {
    return json{{"flipped", report.flipped},
                {"ambiguous", report.ambiguous},
                {"pre_sensitivity", report.pre_sens},
                {"pre_specificity", report.pre_spec},
                {"post_sensitivity", report.post_sens},
                {"post_specificity", report.post_spec}};
}

std::string fmt(double v, int width = 9, int prec = 3) {
    char buf[64];
    if (!std::isfinite(v))
        std::snprintf(buf, sizeof buf, "%*s", width, "-");
    else
        std::snprintf(buf, sizeof buf, "%*.*f", width, prec, v);
    return buf;
}

}  // namespace

json prior_to_json(const PriorSpec& prior) {
    auto vec = [](const Eigen::VectorXd& v) {
        json arr = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
        return arr;
    };
    json out;
    switch (prior.family) {
        case PriorFamily::uniform:
            out["family"] = "uniform";
            out["lower"] = vec(prior.lower);
            out["upper"] = vec(prior.upper);
            break;
        case PriorFamily::normal:
            out["family"] = "normal";
            out["location"] = vec(prior.location);
            out["scale"] = vec(prior.scale);
            break;
        case PriorFamily::double_exponential:
            out["family"] = "double-exponential";
            out["location"] = vec(prior.location);
            out["scale"] = vec(prior.scale);
            break;
        case PriorFamily::student_t:
            out["family"] = "t";
            out["location"] = vec(prior.location);
            out["scale"] = vec(prior.scale);
            out["df"] = vec(prior.df);
            break;
    }
    return out;
}

json fit_result_to_json(const FitResult& fit) {
    const Eigen::Index px = fit.params.beta.size();
    const Eigen::Index p1 = fit.params.gamma1.size();
    const Eigen::Index p2 = fit.params.gamma2.size();
    const Eigen::VectorXd packed = fit.packed();

    json estimates;
    estimates["beta"] = block_json(fit.names, packed, 0, px);
    estimates["gamma1"] = block_json(fit.names, packed, static_cast<std::size_t>(px), p1);
    estimates["gamma2"] =
        block_json(fit.names, packed, static_cast<std::size_t>(px + p1), p2);

    json std_errors = json::object();
    for (std::size_t j = 0; j < fit.names.size(); ++j)
        std_errors[fit.names[j]] = finite_or_null(fit.std_errors[static_cast<Eigen::Index>(j)]);

    json cov = json::array();
    for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < fit.covariance.cols(); ++j)
            row.push_back(finite_or_null(fit.covariance(i, j)));
        cov.push_back(row);
    }

    json out{{"schema_version", kSchemaVersion},
             {"software_version", MISCLASS_VERSION},
             {"method", fit.method},
             {"converged", fit.converged},
             {"iterations", fit.iterations},
             {"loglik", finite_or_null(fit.loglik)},
             {"rank_deficient", fit.rank_deficient},
             {"coefficient_names", fit.names},
             {"estimates", estimates},
             {"std_errors", std_errors},
             {"covariance", cov}};
    out["rates"] = fit.rates ? json{{"sensitivity", fit.rates->sens},
                                    {"specificity", fit.rates->spec}}
                             : json(nullptr);
    out["correction"] = fit.correction ? correction_json(*fit.correction) : json(nullptr);

    if (fit.mcmc) {
        const McmcDiagnostics& d = *fit.mcmc;
        json rhat = json::object(), ess = json::object(), med = json::object();
        for (std::size_t j = 0; j < fit.names.size(); ++j) {
            rhat[fit.names[j]] = finite_or_null(d.rhat[static_cast<Eigen::Index>(j)]);
            ess[fit.names[j]] = finite_or_null(d.ess[static_cast<Eigen::Index>(j)]);
            med[fit.names[j]] = d.posterior_median[static_cast<Eigen::Index>(j)];
        }
        json acc = json::array();
        for (const auto& a : d.acceptance)
            acc.push_back(json{{"beta", a[0]}, {"gamma1", a[1]}, {"gamma2", a[2]}});
        json chain_corr = json::array();
        for (const auto& c : d.chain_corrections) chain_corr.push_back(correction_json(c));
        out["mcmc"] = json{{"split_rhat", rhat},
                           {"ess", ess},
                           {"posterior_median", med},
                           {"acceptance", acc},
                           {"chain_corrections", chain_corr},
                           {"kept_draws", d.kept_draws},
                           {"warnings", d.warnings}};
    } else {
        out["mcmc"] = nullptr;
    }
    return out;
}

json scenario_to_json(const ScenarioConfig& s) {
    auto vec = [](const Eigen::VectorXd& v) {
        json arr = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
        return arr;
    };
    json methods = json::array();
    for (Method m : s.estimators) methods.push_back(method_name(m));
    return json{{"name", s.name},
                {"n_realizations", s.n_realizations},
                {"n", s.n},
                {"x_mean", s.x_mean},
                {"z_mean", s.z_mean},
                {"covariance", s.covariance},
                {"beta_true", vec(s.beta_true)},
                {"gamma1_true", vec(s.gamma1_true)},
                {"gamma2_true", vec(s.gamma2_true)},
                {"estimators", methods},
                {"prior", prior_to_json(s.prior)},
                {"seed", s.seed}};
}

json study_report_to_json(const StudyReport& report) {
    json methods = json::object();
    for (const MethodSummary& s : report.summaries) {
        json cells = json::object();
        for (const CellStat& c : s.cells)
            cells[c.name] = json{{"truth", c.truth},
                                 {"bias", finite_or_null(c.bias)},
                                 {"rmse", finite_or_null(c.rmse)},
                                 {"n_used", c.n_used}};
        methods[method_name(s.method)] =
            json{{"coefficients", cells},
                 {"probabilities", json{{"p_y1", finite_or_null(s.mean_p1)},
                                        {"p_y2", finite_or_null(s.mean_p2)},
                                        {"sensitivity", finite_or_null(s.mean_sens)},
                                        {"specificity", finite_or_null(s.mean_spec)}}},
                 {"n_failed", s.n_failed},
                 {"n_ambiguous", s.n_ambiguous},
                 {"n_nonconverged", s.n_nonconverged}};
    }
    return json{{"schema_version", kSchemaVersion},
                {"software_version", MISCLASS_VERSION},
                {"scenario", scenario_to_json(report.scenario)},
                {"data", json{{"p_y1", finite_or_null(report.data_mean_p1)},
                              {"p_y2", finite_or_null(1.0 - report.data_mean_p1)},
                              {"sensitivity", finite_or_null(report.data_mean_sens)},
                              {"specificity", finite_or_null(report.data_mean_spec)}}},
                {"methods", methods}};
}

std::string render_fit_table(const FitResult& fit) {
    std::ostringstream out;
    out << "method: " << fit.method << "   converged: " << (fit.converged ? "yes" : "no")
        << "   iterations: " << fit.iterations << "   loglik: " << fmt(fit.loglik, 0, 4)
        << "\n\n";
    out << "  coefficient        estimate          SE\n";
    const Eigen::VectorXd packed = fit.packed();
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "  %-15s %11s %11s\n", fit.names[j].c_str(),
                      fmt(packed[static_cast<Eigen::Index>(j)], 11, 4).c_str(),
                      fmt(fit.std_errors[static_cast<Eigen::Index>(j)], 11, 4).c_str());
        out << buf;
    }
    if (fit.rates)
        out << "\naverage sensitivity: " << fmt(fit.rates->sens, 0, 4)
            << "   average specificity: " << fmt(fit.rates->spec, 0, 4) << "\n";
    if (fit.correction) {
        out << "label switching: " << (fit.correction->flipped ? "flipped" : "kept")
            << (fit.correction->ambiguous ? " (ambiguous orientation)" : "") << "  [pre sens "
            << fmt(fit.correction->pre_sens, 0, 4) << ", pre spec "
            << fmt(fit.correction->pre_spec, 0, 4) << "]\n";
    }
    if (fit.mcmc) {
        out << "max split-Rhat: " << fmt(fit.mcmc->rhat.maxCoeff(), 0, 4)
            << "   min ESS: " << fmt(fit.mcmc->ess.minCoeff(), 0, 1) << "\n";
        for (const std::string& w : fit.mcmc->warnings) out << "warning: " << w << "\n";
    }
    return out.str();
}

std::string render_study_tables(const StudyReport& report) {
    std::ostringstream out;
    out << "scenario: " << report.scenario.name << "   replicates: "
        << report.scenario.n_realizations << "   n: " << report.scenario.n << "\n\n";

    // bias / rMSE per coefficient, methods side by side
    std::vector<std::string> all_names =
        coefficient_names(report.scenario.beta_true.size(), report.scenario.gamma1_true.size());
    out << "  coefficient    ";
    for (const MethodSummary& s : report.summaries) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " | %21s", method_name(s.method).c_str());
        out << buf;
    }
    out << "\n                 ";
    for (std::size_t i = 0; i < report.summaries.size(); ++i) out << " |      bias      rMSE";
    out << "\n";
    for (const std::string& name : all_names) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "  %-15s", name.c_str());
        out << buf;
        for (const MethodSummary& s : report.summaries) {
            const CellStat* cell = nullptr;
            for (const CellStat& c : s.cells)
                if (c.name == name) cell = &c;
            if (cell)
                out << " | " << fmt(cell->bias) << " " << fmt(cell->rmse);
            else
                out << " | " << fmt(std::numeric_limits<double>::quiet_NaN()) << " "
                    << fmt(std::numeric_limits<double>::quiet_NaN());
        }
        out << "\n";
    }

    // probability recovery, data column first
    out << "\n  quantity            data";
    for (const MethodSummary& s : report.summaries) {
        char buf[32];
        std::snprintf(buf, sizeof buf, " %9s", method_name(s.method).c_str());
        out << buf;
    }
    out << "\n";
    const char* rows[4] = {"P(Y = 1)", "P(Y = 2)", "sensitivity", "specificity"};
    for (int r = 0; r < 4; ++r) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "  %-16s", rows[r]);
        out << buf;
        const double data_vals[4] = {report.data_mean_p1, 1.0 - report.data_mean_p1,
                                     report.data_mean_sens, report.data_mean_spec};
        out << fmt(data_vals[r]);
        for (const MethodSummary& s : report.summaries) {
            const double vals[4] = {s.mean_p1, s.mean_p2, s.mean_sens, s.mean_spec};
            out << " " << fmt(vals[r]);
        }
        out << "\n";
    }

    for (const MethodSummary& s : report.summaries)
        if (s.n_failed > 0 || s.n_ambiguous > 0)
            out << "\n  " << method_name(s.method) << ": " << s.n_failed
                << " failed replicates excluded, " << s.n_ambiguous
                << " ambiguous corrections\n";
    return out.str();
}

void write_replicates_csv(const std::string& path, const StudyReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const std::vector<std::string> all_names =
        coefficient_names(report.scenario.beta_true.size(), report.scenario.gamma1_true.size());

    out << "replicate,method,ok,converged,flipped,ambiguous,data_p1,data_sens,data_spec,"
           "est_p1,est_sens,est_spec";
    for (const std::string& n : all_names) out << "," << n;
    out << ",failure\n";

    char buf[64];
    auto cell = [&](double v) {
        if (!std::isfinite(v)) return std::string();
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const ReplicateResult& r : report.replicates) {
        for (std::size_t mi = 0; mi < report.scenario.estimators.size(); ++mi) {
            const EstimateRecord& rec = r.records[mi];
            out << r.replicate << ',' << method_name(report.scenario.estimators[mi]) << ','
                << (rec.ok ? 1 : 0) << ',' << (rec.converged ? 1 : 0) << ','
                << (rec.flipped ? 1 : 0) << ',' << (rec.ambiguous ? 1 : 0) << ','
                << cell(r.data_p1) << ',' << cell(r.data_sens) << ',' << cell(r.data_spec)
                << ',' << cell(rec.est_p1) << ',' << cell(rec.est_sens) << ','
                << cell(rec.est_spec);
            for (const std::string& name : all_names) {
                out << ',';
                for (std::size_t j = 0; j < rec.names.size(); ++j)
                    if (rec.names[j] == name) {
                        out << cell(rec.estimates[static_cast<Eigen::Index>(j)]);
                        break;
                    }
            }
            std::string failure = rec.failure;
            for (char& c : failure)
                if (c == ',' || c == '\n') c = ';';
            out << ',' << failure << "\n";
        }
    }
    if (!out) throw IoError("failed while writing " + path);
}

std::vector<std::string> write_chain_draws_csv(const std::string& prefix,
                                               const PosteriorSample& sample) {
    std::vector<std::string> paths;
    for (std::size_t c = 0; c < sample.chains.size(); ++c) {
        const std::string path = prefix + "_chain" + std::to_string(c + 1) + ".csv";
        std::ofstream out(path);
        if (!out) throw IoError("cannot open " + path + " for writing");
        out << "iteration";
        for (const std::string& n : sample.names) out << "," << n;
        out << "\n";
        char buf[64];
        const Eigen::MatrixXd& draws = sample.chains[c].draws;
        for (Eigen::Index i = 0; i < draws.rows(); ++i) {
            out << (i + 1);
            for (Eigen::Index j = 0; j < draws.cols(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", draws(i, j));
                out << ',' << buf;
            }
            out << "\n";
        }
        paths.push_back(path);
    }
    return paths;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string config_hash(const json& config) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a:%016" PRIx64, fnv1a64(config.dump()));
    return buf;
}

json make_manifest(const std::string& command, const json& config, std::uint64_t seed,
                   const std::vector<std::string>& outputs, double wall_clock_seconds) {
    return json{{"schema_version", kSchemaVersion},
                {"software_version", MISCLASS_VERSION},
                {"command", command},
                {"config_hash", config_hash(config)},
                {"seed", seed},
                {"wall_clock_seconds", wall_clock_seconds},
                {"outputs", outputs}};
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out << text;
        if (!out) throw IoError("failed while writing " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp + " into place: " + ec.message());
}

void write_json_atomic(const std::string& path, const json& value) {
    write_text_atomic(path, value.dump(2) + "\n");
}

std::vector<std::string> validate_schema(const json& value, const json& schema,
                                         const std::string& at) {
    std::vector<std::string> errors;
    auto type_ok = [&](const std::string& t) {
        if (t == "object") return value.is_object();
        if (t == "array") return value.is_array();
        if (t == "string") return value.is_string();
        if (t == "number") return value.is_number();
        if (t == "integer") return value.is_number_integer();
        if (t == "boolean") return value.is_boolean();
        if (t == "null") return value.is_null();
        return false;
    };
    if (schema.contains("type")) {
        const json& t = schema["type"];
        bool ok = false;
        if (t.is_string()) {
            ok = type_ok(t.get<std::string>());
        } else {
            for (const json& alt : t) ok = ok || type_ok(alt.get<std::string>());
        }
        if (!ok) {
            errors.push_back(at + ": type mismatch (wanted " + t.dump() + ")");
            return errors;
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const json& alt : schema["enum"]) ok = ok || alt == value;
        if (!ok) errors.push_back(at + ": value not in enum " + schema["enum"].dump());
    }
    if (schema.contains("minimum") && value.is_number() &&
        value.get<double>() < schema["minimum"].get<double>())
        errors.push_back(at + ": below minimum " + schema["minimum"].dump());
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const json& key : schema["required"])
                if (!value.contains(key.get<std::string>()))
                    errors.push_back(at + ": missing required key '" + key.get<std::string>() +
                                     "'");
        if (schema.contains("properties"))
            for (const auto& [key, sub] : schema["properties"].items())
                if (value.contains(key)) {
                    const auto child = validate_schema(value[key], sub, at + "." + key);
                    errors.insert(errors.end(), child.begin(), child.end());
                }
    }
    if (value.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            const auto child =
                validate_schema(value[i], schema["items"], at + "[" + std::to_string(i) + "]");
            errors.insert(errors.end(), child.begin(), child.end());
        }
    }
    return errors;
}

}  // namespace misclass
