#include "bbo/surrogate.hpp"

namespace bbo {

void SurrogateModel::predict_batch(const Eigen::MatrixXd& X, Eigen::VectorXd& mean,
                                   Eigen::VectorXd& variance) const
{
    mean.resize(X.rows());
    variance.resize(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        auto p = predict(X.row(i).transpose());
        mean[i] = p.mean;
        variance[i] = p.variance;
    }
}

} // namespace bbo
