#include "misclass/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "misclass/errors.hpp"

namespace misclass {

namespace {

std::vector<std::string> split_comma(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

double parse_double(const std::string& path, long line, const std::string& field) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(path, line, "cannot parse field '" + field + "' as a number");
    return value;
}

}  // namespace

DatasetCsv read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path + " for reading");

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "missing header row");
    const std::vector<std::string> raw_header = split_comma(line);

    long ystar_col = -1, ytrue_col = -1;
    std::vector<long> x_cols, z_cols;
    for (std::size_t c = 0; c < raw_header.size(); ++c) {
        const std::string name = trimmed(raw_header[c]);
        if (name == "ystar") {
            ystar_col = static_cast<long>(c);
        } else if (name == "y_true") {
            ytrue_col = static_cast<long>(c);
        } else if (name.size() > 1 && name[0] == 'x') {
            x_cols.push_back(static_cast<long>(c));
        } else if (name.size() > 1 && name[0] == 'z') {
            z_cols.push_back(static_cast<long>(c));
        } else {
            throw ParseError(path, 1, "unrecognized column '" + name + "'");
        }
    }
    if (ystar_col < 0) throw ParseError(path, 1, "missing required column 'ystar'");
    if (x_cols.empty()) throw ParseError(path, 1, "need at least one x column");
    if (z_cols.empty()) throw ParseError(path, 1, "need at least one z column");

    std::vector<int> ystar, ytrue;
    std::vector<std::vector<double>> xs, zs;
    long n_dropped = 0;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        const std::vector<std::string> fields = split_comma(line);
        if (fields.size() != raw_header.size())
            throw ParseError(path, line_no,
                             "row has " + std::to_string(fields.size()) + " fields, header has " +
                                 std::to_string(raw_header.size()));
        bool missing = false;
        for (const std::string& f : fields) missing = missing || is_missing(trimmed(f));
        if (missing) {
            ++n_dropped;
            continue;
        }

        const double ys = parse_double(path, line_no, trimmed(fields[static_cast<std::size_t>(ystar_col)]));
        if (ys != 1.0 && ys != 2.0)
            throw ParseError(path, line_no, "ystar must be 1 or 2, got '" +
                                                trimmed(fields[static_cast<std::size_t>(ystar_col)]) + "'");
        ystar.push_back(static_cast<int>(ys));
        if (ytrue_col >= 0) {
            const double yt =
                parse_double(path, line_no, trimmed(fields[static_cast<std::size_t>(ytrue_col)]));
            if (yt != 1.0 && yt != 2.0)
                throw ParseError(path, line_no, "y_true must be 1 or 2");
            ytrue.push_back(static_cast<int>(yt));
        }
        std::vector<double> xrow, zrow;
        for (long c : x_cols)
            xrow.push_back(parse_double(path, line_no, trimmed(fields[static_cast<std::size_t>(c)])));
        for (long c : z_cols)
            zrow.push_back(parse_double(path, line_no, trimmed(fields[static_cast<std::size_t>(c)])));
        xs.push_back(std::move(xrow));
        zs.push_back(std::move(zrow));
    }
    if (ystar.empty()) throw ParseError(path, line_no, "no usable data rows");

    const Eigen::Index n = static_cast<Eigen::Index>(ystar.size());
    Eigen::VectorXi ysv(n);
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(x_cols.size()) + 1);
    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(z_cols.size()) + 1);
    x.col(0).setOnes();
    z.col(0).setOnes();
    for (Eigen::Index i = 0; i < n; ++i) {
        ysv[i] = ystar[static_cast<std::size_t>(i)];
        for (std::size_t c = 0; c < x_cols.size(); ++c)
            x(i, static_cast<Eigen::Index>(c) + 1) = xs[static_cast<std::size_t>(i)][c];
        for (std::size_t c = 0; c < z_cols.size(); ++c)
            z(i, static_cast<Eigen::Index>(c) + 1) = zs[static_cast<std::size_t>(i)][c];
    }

    DatasetCsv out{ObservedDataset(std::move(ysv), std::move(x), std::move(z)), std::nullopt,
                   n_dropped};
    if (ytrue_col >= 0) {
        Eigen::VectorXi ytv(n);
        for (Eigen::Index i = 0; i < n; ++i) ytv[i] = ytrue[static_cast<std::size_t>(i)];
        out.y_true = std::move(ytv);
    }
    return out;
}

void write_dataset_csv(const std::string& path, const ObservedDataset& data,
                       const Eigen::VectorXi* y_true) {
    if (y_true && y_true->size() != data.n())
        throw DimensionError("y_true", "length does not match the dataset");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");

    out << "ystar";
    for (Eigen::Index c = 1; c < data.px(); ++c) out << ",x" << c;
    for (Eigen::Index c = 1; c < data.pz(); ++c) out << ",z" << c;
    if (y_true) out << ",y_true";
    out << "\n";

    char buf[64];
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        out << data.ystar()[i];
        for (Eigen::Index c = 1; c < data.px(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", data.x()(i, c));
            out << ',' << buf;
        }
        for (Eigen::Index c = 1; c < data.pz(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", data.z()(i, c));
            out << ',' << buf;
        }
        if (y_true) out << ',' << (*y_true)[i];
        out << "\n";
    }
    if (!out) throw IoError("failed while writing " + path);
}

}  // namespace misclass
