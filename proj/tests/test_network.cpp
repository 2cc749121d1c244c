#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <numeric>
#include <unistd.h>

#include "helpers.hpp"
#include "signalgauge/network.hpp"

using Catch::Matchers::WithinAbs;

namespace {

// 8x8 grayscale spec small enough for in-test training: one conv block of 4
// kernels, pooled to 4x4, then a 64-unit hidden layer.
sg::ArchitectureSpec tiny_spec(double dropout = 0.0) {
    sg::ArchitectureSpec spec;
    spec.conv_blocks = {4};
    spec.fc_layers = {64};
    spec.input_height = spec.input_width = 8;
    spec.input_channels = 1;
    spec.num_classes = 10;
    spec.dropout_rate = dropout;
    return spec;
}

double batch_loss(sg::Network& net, const sg::Tensor& x, const std::vector<int>& y) {
    sg::Tensor logits = net.forward(x, sg::Mode::Train);
    sg::Tensor grad;
    return sg::softmax_cross_entropy_batch(logits, y, grad);
}

} // namespace

TEST_CASE("network parameter count matches the closed form") {
    sg::Network net(tiny_spec(), 1);
    // conv 3*3*1*4+4; hidden (4*4*4)*64+64; classifier 64*10+10
    const std::size_t expected = (3 * 3 * 1 * 4 + 4) + (4 * 4 * 4) * 64 + 64 + 64 * 10 + 10;
    CHECK(net.parameter_count() == expected);
    CHECK(net.parameter_count() == sg::parameter_count(net.spec()));
    CHECK(net.parameters_finite());
}

TEST_CASE("fc width must match the flattened input") {
    auto spec = tiny_spec();
    spec.fc_layers = {65};
    CHECK_THROWS_AS(sg::Network(spec, 1), sg::ShapeMismatch);
    spec.fc_layers = {};
    CHECK_THROWS_AS(sg::Network(spec, 1), sg::ShapeMismatch);
}

TEST_CASE("identical seeds give bit-identical initialization") {
    sg::Network a(tiny_spec(), 7), b(tiny_spec(), 7), c(tiny_spec(), 8);
    auto pa = a.params(), pb = b.params(), pc = c.params();
    REQUIRE(pa.size() == pb.size());
    bool same_seed_equal = true, diff_seed_equal = true;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        same_seed_equal = same_seed_equal && (pa[i]->data == pb[i]->data);
        diff_seed_equal = diff_seed_equal && (pa[i]->data == pc[i]->data);
    }
    CHECK(same_seed_equal);
    CHECK_FALSE(diff_seed_equal);
}

TEST_CASE("sgd_step applies theta -= lr * grad") {
    sg::Network net(tiny_spec(), 3);
    net.zero_grads();
    auto params = net.params();
    auto grads = net.grads();
    const float before = params[0]->data[0];
    grads[0]->data[0] = 2.0f;

    SECTION("lr = 0 is a no-op") {
        sg::sgd_step(net, 0.0);
        CHECK(params[0]->data[0] == before);
    }
    SECTION("scalar update") {
        sg::sgd_step(net, 0.5);
        CHECK_THAT(params[0]->data[0], WithinAbs(before - 1.0, 1e-6));
    }
}

TEST_CASE("one small sgd step decreases the batch loss") {
    auto ds = sgtest::separable_dataset(32, 8, 8, 5);
    sg::Network net(tiny_spec(), 11);
    std::vector<std::size_t> idx(32);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    sg::Tensor x;
    std::vector<int> y;
    sg::detail::fill_batch(ds, idx, 0, 32, x, y);

    const double before = batch_loss(net, x, y);
    sg::Tensor logits = net.forward(x, sg::Mode::Train);
    sg::Tensor grad;
    sg::softmax_cross_entropy_batch(logits, y, grad);
    net.zero_grads();
    net.backward(grad);
    sg::sgd_step(net, 1e-4);
    const double after = batch_loss(net, x, y);
    CHECK(after < before);
}

TEST_CASE("untrained network scores near chance on balanced labels") {
    auto ds = sgtest::separable_dataset(200, 8, 8, 9);
    sg::Network net(tiny_spec(), 21);
    const double acc = sg::evaluate(net, ds);
    CHECK(acc >= 0.0);
    CHECK(acc <= 0.5); // ten balanced classes; chance is 0.10
}

TEST_CASE("evaluate with a forced classifier bias") {
    auto ds = sgtest::separable_dataset(50, 8, 8, 13);
    sg::Network net(tiny_spec(), 2);
    // zero everything, then push class 3 via the final bias: every argmax is 3
    for (sg::Tensor* p : net.params())
        p->zero();
    auto params = net.params();
    sg::Tensor* final_bias = params.back();
    REQUIRE(final_bias->numel() == 10);
    final_bias->data[3] = 5.0f;

    std::size_t count3 = 0;
    for (auto l : ds.labels)
        if (l == 3)
            ++count3;
    CHECK_THAT(sg::evaluate(net, ds), WithinAbs(double(count3) / double(ds.size()), 1e-12));

    final_bias->zero();
    final_bias->data[ds.labels[0]] = 5.0f;
    // independent oracle: count labels equal to the favored class by hand
    std::size_t expect = 0;
    for (auto l : ds.labels)
        if (l == ds.labels[0])
            ++expect;
    CHECK_THAT(sg::evaluate(net, ds, 7 /*odd batch size*/),
               WithinAbs(double(expect) / double(ds.size()), 1e-12));
}

TEST_CASE("training on separable data learns past chance") {
    auto train_ds = sgtest::separable_dataset(300, 8, 8, 31);
    auto val_ds = sgtest::separable_dataset(100, 8, 8, 32);
    sg::Network net(tiny_spec(0.1), 41);
    sg::TrainOptions opt;
    opt.steps = 120;
    opt.batch_size = 16;
    opt.learning_rate = 0.05;
    opt.checkpoint_steps = {10, 60, 120};
    opt.seed = 41;
    opt.config_id = "tiny";
    sg::RunResult r = sg::train(net, train_ds, val_ds, opt);

    REQUIRE(r.checkpoint_steps == std::vector<int>{10, 60, 120});
    REQUIRE(r.checkpoint_accuracy.size() == 3);
    CHECK(r.checkpoint_accuracy.back() > 0.2); // well past 0.10 chance
    CHECK(r.final_eval_split == "validation");
    CHECK(r.final_test_accuracy == r.checkpoint_accuracy.back());
    CHECK(r.wall_time_seconds > 0.0);
    CHECK(net.parameters_finite());
}

TEST_CASE("training is deterministic per seed") {
    auto train_ds = sgtest::separable_dataset(120, 8, 8, 51);
    auto val_ds = sgtest::separable_dataset(40, 8, 8, 52);
    sg::TrainOptions opt;
    opt.steps = 30;
    opt.batch_size = 8;
    opt.learning_rate = 0.02;
    opt.checkpoint_steps = {10, 30};
    opt.seed = 5;

    sg::Network a(tiny_spec(0.5), 5), b(tiny_spec(0.5), 5);
    auto ra = sg::train(a, train_ds, val_ds, opt);
    auto rb = sg::train(b, train_ds, val_ds, opt);
    CHECK(ra.checkpoint_accuracy == rb.checkpoint_accuracy);
    auto pa = a.params(), pb = b.params();
    for (std::size_t i = 0; i < pa.size(); ++i)
        CHECK(pa[i]->data == pb[i]->data);
}

TEST_CASE("train validates its options") {
    auto train_ds = sgtest::separable_dataset(40, 8, 8, 61);
    auto val_ds = sgtest::separable_dataset(10, 8, 8, 62);
    sg::Network net(tiny_spec(), 1);
    sg::TrainOptions opt;
    opt.steps = 5;
    opt.checkpoint_steps = {3, 2};
    CHECK_THROWS_AS(sg::train(net, train_ds, val_ds, opt), sg::DomainError);
    opt.checkpoint_steps = {2, 9};
    CHECK_THROWS_AS(sg::train(net, train_ds, val_ds, opt), sg::DomainError);
    opt.checkpoint_steps = {};
    CHECK_THROWS_AS(sg::train(net, sg::ImageDataset{}, val_ds, opt), sg::EmptyDataset);
}

TEST_CASE("final evaluation prefers a supplied test set") {
    auto train_ds = sgtest::separable_dataset(60, 8, 8, 71);
    auto val_ds = sgtest::separable_dataset(20, 8, 8, 72);
    auto test_ds = sgtest::separable_dataset(20, 8, 8, 73);
    sg::Network net(tiny_spec(), 1);
    sg::TrainOptions opt;
    opt.steps = 4;
    opt.checkpoint_steps = {4};
    opt.test_set = &test_ds;
    auto r = sg::train(net, train_ds, val_ds, opt);
    CHECK(r.final_eval_split == "test");
    sg::Network copy(tiny_spec(), 1);
    // the reported number must equal a fresh evaluation of the trained net
    CHECK_THAT(r.final_test_accuracy, WithinAbs(sg::evaluate(net, test_ds), 1e-12));
}

TEST_CASE("parameter container round-trips") {
    namespace fs = std::filesystem;
    const std::string path =
        (fs::temp_directory_path() / ("sgnet-" + std::to_string(::getpid()) + ".bin")).string();

    auto train_ds = sgtest::separable_dataset(60, 8, 8, 81);
    auto val_ds = sgtest::separable_dataset(20, 8, 8, 82);
    sg::Network net(tiny_spec(), 17);
    sg::TrainOptions opt;
    opt.steps = 10;
    opt.checkpoint_steps = {10};
    sg::train(net, train_ds, val_ds, opt);
    sg::save_params(net, path);

    sg::Network other(tiny_spec(), 999); // different init, same shapes
    sg::load_params(other, path);
    auto pa = net.params(), pb = other.params();
    for (std::size_t i = 0; i < pa.size(); ++i)
        CHECK(pa[i]->data == pb[i]->data);
    CHECK_THAT(sg::evaluate(other, val_ds), WithinAbs(sg::evaluate(net, val_ds), 1e-12));

    SECTION("wrong architecture is rejected") {
        auto spec = tiny_spec();
        spec.conv_blocks = {8};
        sg::Network mismatched(spec, 1);
        CHECK_THROWS_AS(sg::load_params(mismatched, path), sg::ShapeMismatch);
    }
    SECTION("garbage magic is rejected") {
        std::ofstream f(path, std::ios::binary);
        f << "not a model";
        f.close();
        sg::Network fresh(tiny_spec(), 1);
        CHECK_THROWS_AS(sg::load_params(fresh, path), sg::BadMagic);
    }
    fs::remove(path);
}
