#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "delrl/util.hpp"

namespace delrl {

/**
 * Small feed-forward regressor/classifier trained with Adam. ReLU hidden
 * layers, linear head; squared error for continuous targets or softmax
 * cross-entropy when `classifier` is set. Everything is deterministic given
 * the RNG handed to init/train.
 */
struct MlpConfig {
    int input_dim = 1;
    int output_dim = 1;
    std::vector<int> hidden{100, 100, 10};
    double learning_rate = 1e-3;
    int batch_size = 64;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    bool classifier = false;
};

class MlpModel {
  public:
    MlpModel() = default;

    MlpModel(MlpConfig config, Rng& rng) : config_(std::move(config)) {
        std::vector<int> dims;
        dims.push_back(config_.input_dim);
        for (int h : config_.hidden) dims.push_back(h);
        dims.push_back(config_.output_dim);
        const std::size_t n_layers = dims.size() - 1;
        weights_.resize(n_layers);
        biases_.resize(n_layers);
        for (std::size_t l = 0; l < n_layers; ++l) {
            int fan_in = dims[l], fan_out = dims[l + 1];
            double bound = std::sqrt(6.0 / double(fan_in));  // He-uniform
            std::uniform_real_distribution<double> unif(-bound, bound);
            weights_[l].resize(fan_out, fan_in);
            for (int i = 0; i < fan_out; ++i)
                for (int j = 0; j < fan_in; ++j) weights_[l](i, j) = unif(rng);
            biases_[l] = Eigen::VectorXd::Zero(fan_out);
        }
        reset_adam();
    }

    const MlpConfig& config() const { return config_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
        Eigen::VectorXd h = x;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            h = weights_[l] * h + biases_[l];
            if (l + 1 < weights_.size()) h = h.cwiseMax(0.0);
        }
        return h;
    }

    /// Classifier-mode class probabilities.
    Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const {
        require(config_.classifier, "MlpModel: predict_proba needs classifier mode");
        Eigen::VectorXd z = forward(x);
        z.array() -= z.maxCoeff();
        Eigen::VectorXd e = z.array().exp();
        return e / e.sum();
    }

    /**
     * One shuffled pass of mini-batch Adam over (inputs, targets); rows are
     * samples. Classifier targets are one-hot rows. Returns the mean training
     * loss of the pass. Throws on non-finite loss.
     */
    double train_epoch(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, Rng& rng) {
        require(inputs.rows() == targets.rows() && inputs.rows() > 0, "MlpModel: bad training batch");
        require(inputs.cols() == config_.input_dim && targets.cols() == config_.output_dim,
                "MlpModel: training dims do not match the model layout");
        const auto n = inputs.rows();
        std::vector<Eigen::Index> order(std::size_t(n), 0);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        Eigen::Index done = 0;
        while (done < n) {
            Eigen::Index b = std::min<Eigen::Index>(config_.batch_size, n - done);
            Eigen::MatrixXd x(b, config_.input_dim), y(b, config_.output_dim);
            for (Eigen::Index i = 0; i < b; ++i) {
                x.row(i) = inputs.row(order[std::size_t(done + i)]);
                y.row(i) = targets.row(order[std::size_t(done + i)]);
            }
            loss_sum += double(b) * train_batch(x, y);
            done += b;
        }
        double mean_loss = loss_sum / double(n);
        if (!std::isfinite(mean_loss))
            throw std::runtime_error("MlpModel: training loss diverged (non-finite); step " +
                                     std::to_string(adam_step_));
        return mean_loss;
    }

    double evaluate_loss(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) const {
        const auto n = inputs.rows();
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::VectorXd out = forward(inputs.row(i).transpose());
            if (config_.classifier) {
                Eigen::VectorXd z = out;
                z.array() -= z.maxCoeff();
                double logsum = std::log(z.array().exp().sum());
                for (int k = 0; k < config_.output_dim; ++k)
                    if (targets(i, k) > 0.0) total -= targets(i, k) * (z(k) - logsum);
            } else {
                total += (out - targets.row(i).transpose()).squaredNorm() / double(config_.output_dim);
            }
        }
        return total / double(n);
    }

    int parameter_count() const {
        int count = 0;
        for (std::size_t l = 0; l < weights_.size(); ++l)
            count += int(weights_[l].size() + biases_[l].size());
        return count;
    }

    // Flat-parameter checkpoint with a layout header.
    void save(std::ostream& os) const {
        os << "mlp v1\n";
        os << "layout " << config_.input_dim;
        for (int h : config_.hidden) os << " " << h;
        os << " " << config_.output_dim << "\n";
        os << "classifier " << (config_.classifier ? 1 : 0) << "\n";
        os << "params " << parameter_count() << "\n";
        os << std::setprecision(17);
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            for (int i = 0; i < weights_[l].rows(); ++i)
                for (int j = 0; j < weights_[l].cols(); ++j) os << weights_[l](i, j) << "\n";
            for (int i = 0; i < biases_[l].size(); ++i) os << biases_[l](i) << "\n";
        }
    }

    static MlpModel load(std::istream& is) {
        std::string header, version, key;
        is >> header >> version;
        require(header == "mlp" && version == "v1", "MlpModel::load: unknown format header");
        is >> key;
        require(key == "layout", "MlpModel::load: expected layout");
        std::string rest;
        std::getline(is, rest);
        std::istringstream dims_in(rest);
        std::vector<int> dims;
        int d;
        while (dims_in >> d) dims.push_back(d);
        require(dims.size() >= 2, "MlpModel::load: layout needs input and output dims");
        int flag = 0, declared = 0;
        is >> key >> flag;
        require(key == "classifier", "MlpModel::load: expected classifier flag");
        is >> key >> declared;
        require(key == "params", "MlpModel::load: expected parameter count");

        MlpModel m;
        m.config_.input_dim = dims.front();
        m.config_.output_dim = dims.back();
        m.config_.hidden.assign(dims.begin() + 1, dims.end() - 1);
        m.config_.classifier = flag != 0;
        m.weights_.resize(dims.size() - 1);
        m.biases_.resize(dims.size() - 1);
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            m.weights_[l].resize(dims[l + 1], dims[l]);
            for (int i = 0; i < dims[l + 1]; ++i)
                for (int j = 0; j < dims[l]; ++j) is >> m.weights_[l](i, j);
            m.biases_[l].resize(dims[l + 1]);
            for (int i = 0; i < dims[l + 1]; ++i) is >> m.biases_[l](i);
        }
        require(m.parameter_count() == declared, "MlpModel::load: parameter count mismatch");
        m.reset_adam();
        return m;
    }

  private:
    void reset_adam() {
        m_w_.clear();
        v_w_.clear();
        m_b_.clear();
        v_b_.clear();
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            m_w_.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
            v_w_.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
            m_b_.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
            v_b_.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
        }
        adam_step_ = 0;
    }

    double train_batch(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
        const std::size_t n_layers = weights_.size();
        const auto b = x.rows();
        // forward, keeping activations
        std::vector<Eigen::MatrixXd> acts;
        acts.reserve(n_layers + 1);
        acts.push_back(x);
        for (std::size_t l = 0; l < n_layers; ++l) {
            Eigen::MatrixXd z =
                (acts.back() * weights_[l].transpose()).rowwise() + biases_[l].transpose();
            if (l + 1 < n_layers) z = z.cwiseMax(0.0);
            acts.push_back(std::move(z));
        }

        Eigen::MatrixXd delta;  // dLoss/dz of the head
        double loss = 0.0;
        if (config_.classifier) {
            Eigen::MatrixXd probs = acts.back();
            for (Eigen::Index i = 0; i < b; ++i) {
                Eigen::VectorXd z = probs.row(i).transpose();
                z.array() -= z.maxCoeff();
                Eigen::VectorXd e = z.array().exp();
                Eigen::VectorXd p = e / e.sum();
                for (int k = 0; k < config_.output_dim; ++k)
                    if (y(i, k) > 0.0) loss -= y(i, k) * std::log(std::max(p(k), 1e-300));
                probs.row(i) = p.transpose();
            }
            loss /= double(b);
            delta = (probs - y) / double(b);
        } else {
            Eigen::MatrixXd err = acts.back() - y;
            loss = err.squaredNorm() / double(b * config_.output_dim);
            delta = 2.0 * err / double(b * config_.output_dim);
        }

        ++adam_step_;
        double bc1 = 1.0 - std::pow(config_.adam_beta1, adam_step_);
        double bc2 = 1.0 - std::pow(config_.adam_beta2, adam_step_);
        for (std::size_t l = n_layers; l-- > 0;) {
            Eigen::MatrixXd grad_w = delta.transpose() * acts[l];
            Eigen::VectorXd grad_b = delta.colwise().sum().transpose();
            if (l > 0) {
                delta = delta * weights_[l];
                delta = delta.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
            }
            m_w_[l] = config_.adam_beta1 * m_w_[l] + (1.0 - config_.adam_beta1) * grad_w;
            v_w_[l] = config_.adam_beta2 * v_w_[l] + (1.0 - config_.adam_beta2) * grad_w.cwiseProduct(grad_w);
            m_b_[l] = config_.adam_beta1 * m_b_[l] + (1.0 - config_.adam_beta1) * grad_b;
            v_b_[l] = config_.adam_beta2 * v_b_[l] + (1.0 - config_.adam_beta2) * grad_b.cwiseProduct(grad_b);
            weights_[l] -= (config_.learning_rate * (m_w_[l] / bc1).array() /
                            ((v_w_[l] / bc2).array().sqrt() + config_.adam_eps))
                               .matrix();
            biases_[l] -= (config_.learning_rate * (m_b_[l] / bc1).array() /
                           ((v_b_[l] / bc2).array().sqrt() + config_.adam_eps))
                              .matrix();
        }
        return loss;
    }

    MlpConfig config_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
    std::vector<Eigen::MatrixXd> m_w_, v_w_;
    std::vector<Eigen::VectorXd> m_b_, v_b_;
    long adam_step_ = 0;
};

}  // namespace delrl
