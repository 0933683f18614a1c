// Student/teacher classifier over flattened videos, trained by SGD on the KL
// divergence between a blended teacher/one-hot target and the
// temperature-scaled student distribution. Hard-label training is the alpha=0
// endpoint of the same loss.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gvd/dataset.hpp"
#include "gvd/latent.hpp"
#include "gvd/mlp.hpp"

namespace gvd {

struct Classifier {
    Mlp net;
    int frames = 0;
    int dim = 0;
    int class_count = 0;

    Vec logits(const Mat & video) const;
    Vec hidden_features(const Mat & video) const;
    int predict(const Mat & video) const;  // argmax, lowest index on ties
};

struct ClassifierTrainConfig {
    int hidden = 64;
    int epochs = 500;
    int batch = 128;
    double learning_rate = 0.01;
    double decay_factor = 0.1;  // applied to the learning rate at the half-way epoch
    uint64_t seed = 0;

    void validate() const;
};

struct SoftLabelConfig {
    double alpha = 0.2;
    double temperature = 3.0;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;  // NaN when no test set was supplied
};

struct ClassifierTrainResult {
    Classifier model;
    std::vector<EpochStats> trace;
};

Vec softmax(const Vec & z);

// KL(target || probs) with the 0 log 0 = 0 convention; probs must be strictly
// positive.
double kl_divergence(const Vec & target, const Vec & probs);

// Loss and its logit gradient for one sample: KL(target || softmax(logits /
// temperature)). The gradient is (softmax(logits / temperature) - target) /
// temperature.
double soft_target_loss(const Vec & logits, const Vec & target, double temperature);
Vec soft_target_grad(const Vec & logits, const Vec & target, double temperature);

// alpha * teacher + (1 - alpha) * one-hot label.
Vec blend_target(const Vec & teacher_probs, uint32_t label, double alpha);

// When soft is non-null the train set must carry soft labels; the stored
// teacher rows are blended with the one-hot labels. A non-finite loss aborts
// with the epoch in the message. The optional test set only feeds the trace.
ClassifierTrainResult train_classifier(const VideoDataset & train, const ClassifierTrainConfig & cfg,
                                       const SoftLabelConfig * soft, const VideoDataset * test = nullptr);

double evaluate(const Classifier & model, const VideoDataset & data);

// softmax of teacher logits / temperature per record.
std::vector<Vec> teacher_soft_labels(const Classifier & teacher, const VideoDataset & data,
                                     double temperature);

// Accuracy of a full-data-trained reference model on the distilled records.
double representativeness(const Classifier & reference, const VideoDataset & distilled);

// Trace rows as CSV: epoch, loss, train_acc, test_acc.
void save_train_trace_csv(const std::vector<EpochStats> & trace, const std::string & path);

}  // namespace gvd
