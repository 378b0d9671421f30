#include "onebit/csv.hpp"

#include <cstdio>
#include <ostream>

namespace onebit {

std::string format_double(double x)
{
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(len));
}

void write_dataset_csv(std::ostream& os, const Dataset& data)
{
    os << 'y';
    for (Eigen::Index j = 0; j < data.p(); ++j)
        os << ",x" << j + 1;
    os << '\n';
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        os << data.labels(i);
        for (Eigen::Index j = 0; j < data.p(); ++j)
            os << ',' << format_double(data.covariates(i, j));
        os << '\n';
    }
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0)
                os << ',';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

}  // namespace onebit
