#include "misclass/types.hpp"

#include <set>
#include <utility>

namespace misclass {

ObservedDataset::ObservedDataset(Eigen::VectorXi ystar, Eigen::MatrixXd x, Eigen::MatrixXd z)
    : ystar_(std::move(ystar)), x_(std::move(x)), z_(std::move(z)) {
    const Eigen::Index n = ystar_.size();
    if (n == 0) throw ValidationError("dataset is empty");
    if (x_.rows() != n)
        throw DimensionError("x_matrix", "has " + std::to_string(x_.rows()) + " rows for " +
                                             std::to_string(n) + " subjects");
    if (z_.rows() != n)
        throw DimensionError("z_matrix", "has " + std::to_string(z_.rows()) + " rows for " +
                                             std::to_string(n) + " subjects");
    if (x_.cols() < 1 || (x_.col(0).array() != 1.0).any())
        throw ValidationError("x_matrix must carry a constant leading intercept column of 1");
    if (z_.cols() < 1 || (z_.col(0).array() != 1.0).any())
        throw ValidationError("z_matrix must carry a constant leading intercept column of 1");
    if (!x_.allFinite() || !z_.allFinite())
        throw ValidationError("design matrices must be finite");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (ystar_[i] != 1 && ystar_[i] != 2)
            throw ValidationError("ystar[" + std::to_string(i) + "] = " +
                                  std::to_string(ystar_[i]) + "; observed classes must be 1 or 2");
    }
    ystar1_ = (ystar_.array() == 1).cast<double>();
}

bool ObservedDataset::identifiable() const {
    std::set<std::vector<double>> distinct;
    std::vector<double> row(static_cast<std::size_t>(x_.cols() + z_.cols()));
    for (Eigen::Index i = 0; i < n(); ++i) {
        for (Eigen::Index c = 0; c < x_.cols(); ++c) row[static_cast<std::size_t>(c)] = x_(i, c);
        for (Eigen::Index c = 0; c < z_.cols(); ++c)
            row[static_cast<std::size_t>(x_.cols() + c)] = z_(i, c);
        distinct.insert(row);
        if (distinct.size() >= 7) return true;
    }
    return false;
}

Eigen::VectorXd pack_parameters(const ParameterSet& params, Restriction r) {
    const bool g1 = r != Restriction::perfect_sensitivity;
    const bool g2 = r != Restriction::perfect_specificity;
    Eigen::VectorXd theta(params.beta.size() + (g1 ? params.gamma1.size() : 0) +
                          (g2 ? params.gamma2.size() : 0));
    Eigen::Index at = 0;
    theta.segment(at, params.beta.size()) = params.beta;
    at += params.beta.size();
    if (g1) {
        theta.segment(at, params.gamma1.size()) = params.gamma1;
        at += params.gamma1.size();
    }
    if (g2) theta.segment(at, params.gamma2.size()) = params.gamma2;
    return theta;
}

ParameterSet unpack_parameters(const Eigen::VectorXd& theta, Eigen::Index px, Eigen::Index pz,
                               Restriction r) {
    const bool g1 = r != Restriction::perfect_sensitivity;
    const bool g2 = r != Restriction::perfect_specificity;
    const Eigen::Index want = px + (g1 ? pz : 0) + (g2 ? pz : 0);
    if (theta.size() != want)
        throw DimensionError("parameter stack", "got length " + std::to_string(theta.size()) +
                                                    ", expected " + std::to_string(want));
    ParameterSet params;
    Eigen::Index at = 0;
    params.beta = theta.segment(at, px);
    at += px;
    if (g1) {
        params.gamma1 = theta.segment(at, pz);
        at += pz;
    }
    if (g2) params.gamma2 = theta.segment(at, pz);
    return params;
}

static void append_gamma_names(std::vector<std::string>& names, Eigen::Index pz, int j) {
    names.push_back("gamma_1" + std::to_string(j) + "0");
    for (Eigen::Index c = 1; c < pz; ++c)
        names.push_back("gamma_1" + std::to_string(j) + "z" + std::to_string(c));
}

std::vector<std::string> beta_coefficient_names(Eigen::Index px) {
    std::vector<std::string> names;
    names.push_back("beta_0");
    for (Eigen::Index c = 1; c < px; ++c) names.push_back("beta_x" + std::to_string(c));
    return names;
}

std::vector<std::string> coefficient_names(Eigen::Index px, Eigen::Index pz, Restriction r) {
    std::vector<std::string> names = beta_coefficient_names(px);
    if (r != Restriction::perfect_sensitivity) append_gamma_names(names, pz, 1);
    if (r != Restriction::perfect_specificity) append_gamma_names(names, pz, 2);
    return names;
}

}  // namespace misclass
