#ifndef MISCLASS_CSV_HPP
#define MISCLASS_CSV_HPP

#include <optional>
#include <string>

#include "misclass/types.hpp"

namespace misclass {

// Dataset CSV layout: header row with columns `ystar`, `x1..xp`, `z1..zq`
// and optionally `y_true`, in any order. Intercept columns are appended
// internally. Rows with missing fields ("" / NA / NaN) are dropped and
// counted; anything else malformed raises a line-precise ParseError.
struct DatasetCsv {
    ObservedDataset data;
    std::optional<Eigen::VectorXi> y_true;
    long n_dropped = 0;
};

DatasetCsv read_dataset_csv(const std::string& path);

void write_dataset_csv(const std::string& path, const ObservedDataset& data,
                       const Eigen::VectorXi* y_true = nullptr);

}  // namespace misclass

#endif
