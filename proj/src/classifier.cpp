#include "gvd/classifier.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "gvd/rng.hpp"

namespace gvd {

Vec Classifier::logits(const Mat & video) const {
    if (video.rows() != frames || video.cols() != dim) {
        throw error(error_kind::dimension, "video shape does not match classifier");
    }
    return net.forward(flatten(video));
}

Vec Classifier::hidden_features(const Mat & video) const {
    if (video.rows() != frames || video.cols() != dim) {
        throw error(error_kind::dimension, "video shape does not match classifier");
    }
    return (net.w1 * flatten(video) + net.b1).array().tanh();
}

int Classifier::predict(const Mat & video) const {
    Vec z = logits(video);
    int best = 0;
    for (int c = 1; c < z.size(); ++c) {
        if (z(c) > z(best)) best = c;
    }
    return best;
}

void ClassifierTrainConfig::validate() const {
    if (hidden < 1 || epochs < 0 || batch < 1) {
        throw error(error_kind::config, "classifier training needs positive hidden/batch and epochs >= 0");
    }
    if (!(learning_rate > 0.0) || !(decay_factor > 0.0)) {
        throw error(error_kind::config, "learning rate and decay factor must be positive");
    }
}

void SoftLabelConfig::validate() const {
    if (!(alpha >= 0.0) || !(alpha <= 1.0)) {
        throw error(error_kind::config, "soft-label alpha must be within [0, 1]");
    }
    if (!(temperature > 0.0)) {
        throw error(error_kind::config, "soft-label temperature must be positive");
    }
}

Vec softmax(const Vec & z) {
    Vec shifted = z.array() - z.maxCoeff();
    Vec e = shifted.array().exp();
    return e / e.sum();
}

double kl_divergence(const Vec & target, const Vec & probs) {
    if (target.size() != probs.size()) {
        throw error(error_kind::dimension, "distributions have different lengths");
    }
    double kl = 0.0;
    for (int i = 0; i < target.size(); ++i) {
        if (target(i) <= 0.0) continue;
        kl += target(i) * (std::log(target(i)) - std::log(probs(i)));
    }
    return kl;
}

double soft_target_loss(const Vec & logits, const Vec & target, double temperature) {
    return kl_divergence(target, softmax(logits / temperature));
}

Vec soft_target_grad(const Vec & logits, const Vec & target, double temperature) {
    return (softmax(logits / temperature) - target) / temperature;
}

Vec blend_target(const Vec & teacher_probs, uint32_t label, double alpha) {
    if (label >= uint32_t(teacher_probs.size())) {
        throw error(error_kind::dimension, "label out of range for target blend");
    }
    Vec target = alpha * teacher_probs;
    target(label) += 1.0 - alpha;
    return target;
}

ClassifierTrainResult train_classifier(const VideoDataset & train, const ClassifierTrainConfig & cfg,
                                       const SoftLabelConfig * soft, const VideoDataset * test) {
    train.validate();
    cfg.validate();
    if (train.records.empty()) throw error(error_kind::precondition, "training set is empty");
    if (soft) {
        soft->validate();
        if (!train.has_soft_labels()) {
            throw error(error_kind::precondition, "soft-label training needs soft labels in the dataset");
        }
    }

    Rng rng(seed_chain(cfg.seed, seed_tag("classifier")));
    ClassifierTrainResult result;
    result.model.frames = train.frames;
    result.model.dim = train.dim;
    result.model.class_count = train.class_count;
    result.model.net = Mlp::init(train.flat_dim(), cfg.hidden, train.class_count, rng);

    const double temperature = soft ? soft->temperature : 1.0;
    const double alpha = soft ? soft->alpha : 0.0;

    std::vector<Vec> inputs;
    std::vector<Vec> targets;
    inputs.reserve(train.records.size());
    targets.reserve(train.records.size());
    for (size_t i = 0; i < train.records.size(); ++i) {
        const auto & rec = train.records[i];
        inputs.push_back(flatten(rec.latent));
        if (soft) {
            targets.push_back(blend_target(train.soft_labels[i], rec.class_id, alpha));
        } else {
            Vec onehot = Vec::Zero(train.class_count);
            onehot(rec.class_id) = 1.0;
            targets.push_back(std::move(onehot));
        }
    }

    auto dataset_accuracy = [&](const VideoDataset & ds) {
        size_t hits = 0;
        for (const auto & rec : ds.records) hits += result.model.predict(rec.latent) == int(rec.class_id);
        return double(hits) / double(ds.records.size());
    };

    std::vector<size_t> order(train.records.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    Mlp grad = Mlp::zeros_like(result.model.net);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double lr = epoch < cfg.epochs / 2 ? cfg.learning_rate : cfg.learning_rate * cfg.decay_factor;
        rng.shuffle(order);

        double epoch_loss = 0.0;
        for (size_t start = 0; start < order.size(); start += size_t(cfg.batch)) {
            size_t stop = std::min(order.size(), start + size_t(cfg.batch));
            grad.set_zero();
            double inv = 1.0 / double(stop - start);
            for (size_t i = start; i < stop; ++i) {
                size_t idx = order[i];
                Vec hidden;
                Vec z = result.model.net.forward(inputs[idx], hidden);
                epoch_loss += soft_target_loss(z, targets[idx], temperature);
                Vec d_out = inv * soft_target_grad(z, targets[idx], temperature);
                result.model.net.backward(inputs[idx], hidden, d_out, grad);
            }
            result.model.net.add_scaled(grad, -lr);
        }
        epoch_loss /= double(order.size());
        if (!std::isfinite(epoch_loss)) {
            throw error(error_kind::training, "classifier loss diverged", "epoch " + std::to_string(epoch));
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.loss = epoch_loss;
        stats.train_accuracy = dataset_accuracy(train);
        stats.test_accuracy = test ? dataset_accuracy(*test) : std::numeric_limits<double>::quiet_NaN();
        result.trace.push_back(stats);
    }
    return result;
}

double evaluate(const Classifier & model, const VideoDataset & data) {
    data.validate();
    if (data.records.empty()) throw error(error_kind::precondition, "evaluation set is empty");
    size_t hits = 0;
    for (const auto & rec : data.records) hits += model.predict(rec.latent) == int(rec.class_id);
    return double(hits) / double(data.records.size());
}

std::vector<Vec> teacher_soft_labels(const Classifier & teacher, const VideoDataset & data,
                                     double temperature) {
    if (!(temperature > 0.0)) throw error(error_kind::config, "temperature must be positive");
    std::vector<Vec> labels;
    labels.reserve(data.records.size());
    for (const auto & rec : data.records) {
        labels.push_back(softmax(teacher.logits(rec.latent) / temperature));
    }
    return labels;
}

double representativeness(const Classifier & reference, const VideoDataset & distilled) {
    return evaluate(reference, distilled);
}

void save_train_trace_csv(const std::vector<EpochStats> & trace, const std::string & path) {
    std::FILE * f = std::fopen(path.c_str(), "wb");
    if (!f) throw error(error_kind::io, "cannot open file for writing", path);
    std::fprintf(f, "epoch,loss,train_acc,test_acc\n");
    for (const auto & row : trace) {
        std::fprintf(f, "%d,%.17g,%.17g,%.17g\n", row.epoch, row.loss, row.train_accuracy, row.test_accuracy);
    }
    if (std::fclose(f) != 0) throw error(error_kind::io, "close failed", path);
}

}  // namespace gvd
