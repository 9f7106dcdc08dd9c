#include "affect/train.hpp"

namespace affect {

std::string_view to_string(TrainTask t) {
    switch (t) {
        case TrainTask::VA: return "va";
        case TrainTask::EXPR: return "expr";
        case TrainTask::AU: return "au";
        case TrainTask::EMI: return "emi";
        case TrainTask::MT_STATIC: return "mt_static";
    }
    return "?";
}

std::string_view to_string(LossKind l) {
    switch (l) {
        case LossKind::ccc_loss: return "ccc_loss";
        case LossKind::weighted_ce: return "weighted_ce";
        case LossKind::weighted_bce: return "weighted_bce";
        case LossKind::weighted_pcc_loss: return "weighted_pcc_loss";
        case LossKind::multitask_eq1: return "multitask_eq1";
    }
    return "?";
}

TrainTask parse_train_task(std::string_view s) {
    if (s == "va") return TrainTask::VA;
    if (s == "expr") return TrainTask::EXPR;
    if (s == "au") return TrainTask::AU;
    if (s == "emi") return TrainTask::EMI;
    if (s == "mt_static") return TrainTask::MT_STATIC;
    throw ConfigError("unknown training task '" + std::string(s) + "'");
}

LossKind parse_loss_kind(std::string_view s) {
    if (s == "ccc_loss") return LossKind::ccc_loss;
    if (s == "weighted_ce") return LossKind::weighted_ce;
    if (s == "weighted_bce") return LossKind::weighted_bce;
    if (s == "weighted_pcc_loss") return LossKind::weighted_pcc_loss;
    if (s == "multitask_eq1") return LossKind::multitask_eq1;
    throw ConfigError("unknown loss '" + std::string(s) + "'");
}

TrainConfig default_train_config(TrainTask task) {
    TrainConfig c;
    c.task = task;
    switch (task) {
        case TrainTask::VA:
            c.loss = LossKind::ccc_loss;
            c.topology = Topology::linear;
            c.activation = Activation::tanh;
            c.epochs = 20;
            break;
        case TrainTask::EXPR:
            c.loss = LossKind::weighted_ce;
            c.topology = Topology::mlp;
            c.activation = Activation::softmax;
            c.epochs = 10;
            break;
        case TrainTask::AU:
            c.loss = LossKind::weighted_bce;
            c.topology = Topology::mlp;
            c.activation = Activation::sigmoid;
            c.epochs = 10;
            break;
        case TrainTask::EMI:
            c.loss = LossKind::weighted_pcc_loss;
            c.topology = Topology::linear;
            c.activation = Activation::sigmoid;
            c.epochs = 100;
            break;
        case TrainTask::MT_STATIC:
            c.loss = LossKind::multitask_eq1;
            c.topology = Topology::linear;
            c.activation = Activation::identity;
            c.epochs = 10;
            break;
    }
    return c;
}

void validate(const TrainConfig& c) {
    if (c.epochs < 1) throw ConfigError("epochs must be at least 1");
    if (c.batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (c.hidden_units < 1) throw ConfigError("hidden_units must be at least 1");
    if (c.output_dim < 0) throw ConfigError("output_dim must be non-negative");
    if (!(c.adam.learning_rate > 0)) throw ConfigError("learning rate must be positive");
    if (!(c.adam.beta1 >= 0 && c.adam.beta1 < 1) || !(c.adam.beta2 >= 0 && c.adam.beta2 < 1))
        throw ConfigError("adam betas must lie in [0, 1)");
    if (!(c.adam.epsilon > 0)) throw ConfigError("adam epsilon must be positive");

    bool compatible = false;
    switch (c.loss) {
        case LossKind::ccc_loss:
            compatible = c.activation == Activation::tanh || c.activation == Activation::identity;
            break;
        case LossKind::weighted_ce: compatible = c.activation == Activation::softmax; break;
        case LossKind::weighted_bce:
        case LossKind::weighted_pcc_loss: compatible = c.activation == Activation::sigmoid; break;
        case LossKind::multitask_eq1: compatible = c.activation == Activation::identity; break;
    }
    if (!compatible)
        throw ConfigError(std::string(to_string(c.loss)) + " cannot be paired with " + std::string(to_string(c.activation)) +
                          " outputs");

    const bool task_ok = (c.task == TrainTask::VA && c.loss == LossKind::ccc_loss) ||
                         (c.task == TrainTask::EXPR && c.loss == LossKind::weighted_ce) ||
                         (c.task == TrainTask::AU && c.loss == LossKind::weighted_bce) ||
                         (c.task == TrainTask::EMI && c.loss == LossKind::weighted_pcc_loss) ||
                         (c.task == TrainTask::MT_STATIC && c.loss == LossKind::multitask_eq1);
    if (!task_ok)
        throw ConfigError(std::string(to_string(c.loss)) + " is not a loss for task " + std::string(to_string(c.task)));
    if (c.class_weights && c.loss == LossKind::multitask_eq1 && c.class_weights->style != WeightStyle::eq1_max_ratio)
        throw ConfigError("multitask_eq1 needs eq1_max_ratio class weights");
}

}  // namespace affect
