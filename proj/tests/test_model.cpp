#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "irony/embeddings.hpp"
#include "irony/model.hpp"
#include "irony/rng.hpp"
#include "irony/tensor.hpp"

using irony::AttentionParams;
using irony::EmbeddingTable;
using irony::LstmCellParams;
using irony::ModelConfig;
using irony::ModelParams;
using irony::OutputParams;
using irony::Pcg32;
using irony::Tape;
using irony::Tensor;

namespace {

EmbeddingTable toy_table(std::size_t vocab, std::size_t dim, std::uint64_t seed,
                         double lo = -0.5, double hi = 0.5) {
    EmbeddingTable t;
    Pcg32 rng(seed);
    for (std::size_t i = 0; i < vocab; ++i) {
        std::vector<float> row(dim);
        for (auto& v : row) v = static_cast<float>(lo + (hi - lo) * rng.uniform());
        t.add("w" + std::to_string(i), row);
    }
    return t;
}

ModelConfig small_cfg(std::size_t emb_dim, std::size_t hidden, std::size_t classes) {
    ModelConfig cfg;
    cfg.emb_dim = emb_dim;
    cfg.hidden = hidden;
    cfg.num_classes = classes;
    cfg.noise_sigma = 0.0;
    cfg.emb_dropout = 0.0;
    cfg.lstm_dropout = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("one-dimensional lstm step matches the hand-computed trace") {
    LstmCellParams<double> p;
    p.in_dim = 1;
    p.hidden = 1;
    p.W = Tensor<double>({4, 2}, {0.5, -0.3, 0.2, 0.4, -0.6, 0.1, 0.7, 0.9}, true);
    p.b = Tensor<double>({4}, {0.1, -0.2, 0.3, 0.05}, true);

    Tape<double> tape;
    auto x = tape.constant({1}, {0.8});
    auto h0 = tape.constant({1}, {-0.5});
    auto c0 = tape.constant({1}, {0.25});
    auto [h, c] = irony::lstm_cell(tape, x, h0, c0, p);

    CHECK(tape.value(c)[0] == Catch::Approx(0.21430531489416005).epsilon(1e-14));
    CHECK(tape.value(h)[0] == Catch::Approx(0.093457761829428943).epsilon(1e-14));
}

TEST_CASE("zero-parameter lstm from zero state emits zero") {
    LstmCellParams<double> p;
    p.in_dim = 2;
    p.hidden = 3;
    p.W = Tensor<double>({12, 5}, true);
    p.b = Tensor<double>({12}, true);

    Tape<double> tape;
    auto x = tape.constant({2}, {1.7, -2.2});
    auto h0 = tape.constant({3}, {0, 0, 0});
    auto c0 = tape.constant({3}, {0, 0, 0});
    auto [h, c] = irony::lstm_cell(tape, x, h0, c0, p);
    for (double v : tape.value(h)) CHECK(v == Catch::Approx(0.0).margin(1e-15));
    // c = 0.5 * g where g = tanh(0) = 0
    for (double v : tape.value(c)) CHECK(v == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("lstm rejects inputs of the wrong width") {
    Pcg32 rng(1);
    LstmCellParams<double> p;
    p.init(3, 2, rng);
    Tape<double> tape;
    auto x = tape.constant({4}, {0, 0, 0, 0});
    auto h0 = tape.constant({2}, {0, 0});
    auto c0 = tape.constant({2}, {0, 0});
    CHECK_THROWS_AS(irony::lstm_cell(tape, x, h0, c0, p), std::invalid_argument);
}

TEST_CASE("a three-step lstm chain passes finite differences") {
    Pcg32 rng(31);
    LstmCellParams<double> p;
    p.init(2, 2, rng, -0.7, 0.7);
    p.b.fill_uniform(rng, -0.7, 0.7);
    std::vector<std::vector<double>> xs = {{0.4, -0.9}, {1.1, 0.2}, {-0.6, 0.5}};

    auto run = [&]() {
        p.W.zero_grad();
        p.b.zero_grad();
        Tape<double> tape;
        auto h = tape.constant({2}, {0, 0});
        auto c = tape.constant({2}, {0, 0});
        for (const auto& xv : xs) {
            auto [h2, c2] = irony::lstm_cell(tape, tape.constant({2}, xv), h, c, p);
            h = h2;
            c = c2;
        }
        auto loss = tape.sum(tape.mul(h, h));
        double out = tape.value_scalar(loss);  // read before backward clears the tape
        tape.backward(loss);
        return out;
    };
    CHECK(irony::grad_check<double>(run, {&p.W, &p.b}, 1e-5) < 1e-4);
}

TEST_CASE("bidirectional layer concatenates both directions per position") {
    Pcg32 rng(5);
    irony::BiLstmLayerParams<double> layer;
    layer.init(2, 3, rng);
    Tape<double> tape;
    std::vector<Tape<double>::Var> xs = {
        tape.constant({2}, {0.5, -0.5}),
        tape.constant({2}, {1.0, 0.0}),
    };
    auto hs = irony::bilstm_layer(tape, xs, layer);
    REQUIRE(hs.size() == 2);
    for (auto h : hs) CHECK(tape.shape(h) == std::vector<std::size_t>{6});
}

TEST_CASE("attention over a single position is the identity") {
    Pcg32 rng(11);
    AttentionParams<double> attn;
    attn.init(4, rng);
    Tape<double> tape;
    auto H = tape.constant({1, 4}, {0.3, -0.2, 0.9, 0.1});
    auto out = irony::attention(tape, H, attn);
    CHECK(tape.value(out.a) == std::vector<double>{1.0});
    CHECK(tape.value(out.r) == std::vector<double>{0.3, -0.2, 0.9, 0.1});
}

TEST_CASE("identical annotations get uniform attention") {
    Pcg32 rng(12);
    AttentionParams<double> attn;
    attn.init(3, rng);
    Tape<double> tape;
    auto H = tape.constant({4, 3}, {1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3});
    auto out = irony::attention(tape, H, attn);
    for (double a : tape.value(out.a)) CHECK(a == Catch::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("attention matches the frozen three-position trace") {
    AttentionParams<double> attn;
    attn.W_h = Tensor<double>({2}, {1.0, 0.0}, true);
    attn.b_h = Tensor<double>({1}, {0.0}, true);
    Tape<double> tape;
    auto H = tape.constant({3, 2}, {0.5, -1.0, 1.5, 0.3, -0.2, 0.8});
    auto out = irony::attention(tape, H, attn);
    auto a = tape.value(out.a);
    CHECK(a[0] == Catch::Approx(0.32525249171621073).epsilon(1e-14));
    CHECK(a[1] == Catch::Approx(0.50655498405837762).epsilon(1e-14));
    CHECK(a[2] == Catch::Approx(0.16819252422541173).epsilon(1e-14));
    auto r = tape.value(out.r);
    CHECK(r[0] == Catch::Approx(0.88882021710058945).epsilon(1e-13));
    CHECK(r[1] == Catch::Approx(-0.038731977118368066).epsilon(1e-13));
}

TEST_CASE("attention weights are equivariant under position permutation") {
    Pcg32 rng(13);
    AttentionParams<double> attn;
    attn.init(3, rng);
    attn.W_h.fill_uniform(rng, -0.8, 0.8);
    attn.b_h.data[0] = 0.17;

    std::vector<double> rows = {0.1, 0.9, -0.4, 1.2, -0.7, 0.3, -0.2, 0.5, 0.8, 0.0, -1.1, 0.6};
    std::vector<double> permuted = {rows.begin() + 6, rows.end()};
    permuted.insert(permuted.end(), rows.begin(), rows.begin() + 6);  // rotate by 2 rows

    Tape<double> tape;
    auto out1 = irony::attention(tape, tape.constant({4, 3}, rows), attn);
    auto out2 = irony::attention(tape, tape.constant({4, 3}, permuted), attn);
    auto a1 = tape.value(out1.a);
    auto a2 = tape.value(out2.a);
    for (int i = 0; i < 4; ++i) CHECK(a2[i] == Catch::Approx(a1[(i + 2) % 4]).epsilon(1e-12));
    auto r1 = tape.value(out1.r);
    auto r2 = tape.value(out2.r);
    for (int j = 0; j < 3; ++j) CHECK(r2[j] == Catch::Approx(r1[j]).margin(1e-12));
}

TEST_CASE("output layer produces calibrated softmax probabilities") {
    OutputParams<double> out;
    out.W = Tensor<double>({4, 3}, std::vector<double>(12, 0.0), true);
    out.b = Tensor<double>({4}, true);
    Tape<double> tape;
    auto p = tape.value(irony::output_layer(tape, tape.constant({3}, {1, 2, 3}), out));
    for (double v : p) CHECK(v == Catch::Approx(0.25));

    OutputParams<double> out2;
    out2.W = Tensor<double>({2, 1}, {std::log(3.0), 0.0}, true);
    out2.b = Tensor<double>({2}, true);
    auto p2 = tape.value(irony::output_layer(tape, tape.constant({1}, {1.0}), out2));
    CHECK(p2[0] == Catch::Approx(0.75).epsilon(1e-12));
    CHECK(p2[1] == Catch::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("word model appends a frozen zero unknown row") {
    auto table = toy_table(5, 4, 3);
    auto m = irony::make_word_model<float>(table, small_cfg(4, 3, 2));
    REQUIRE(m.vocab.size() == 6);
    CHECK(m.vocab.back() == irony::kUnkToken);
    CHECK(m.unk == 5);
    CHECK_FALSE(m.embedding.requires_grad);
    for (std::size_t j = 0; j < 4; ++j) CHECK(m.embedding.data[5 * 4 + j] == 0.0f);
    // known rows copied verbatim
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(m.embedding.data[j] == table.vectors[j]);

    auto ids = m.encode({"w0", "nope", "w4"});
    CHECK(ids == std::vector<int>{0, 5, 4});
}

TEST_CASE("encode truncates to the configured maximum length") {
    auto table = toy_table(3, 2, 4);
    auto cfg = small_cfg(2, 2, 2);
    cfg.max_len = 3;
    auto m = irony::make_word_model<float>(table, cfg);
    std::vector<std::string> units(10, "w1");
    CHECK(m.encode(units).size() == 3);
}

TEST_CASE("character model learns its embedding") {
    auto cfg = small_cfg(5, 3, 2);
    cfg.freeze_embedding = false;
    auto m = irony::make_char_model<float>({"a", "b", "c"}, cfg);
    REQUIRE(m.vocab.size() == 4);
    CHECK(m.vocab.back() == "<unk-char>");
    CHECK(m.embedding.requires_grad);
    // learned rows start non-zero
    bool any = false;
    for (float v : m.embedding.data) any = any || v != 0.0f;
    CHECK(any);
    auto params = m.trainable();
    CHECK(std::find(params.begin(), params.end(), &m.embedding) != params.end());
}

TEST_CASE("frozen embeddings are excluded from the trainable set") {
    auto table = toy_table(4, 3, 6);
    auto m = irony::make_word_model<float>(table, small_cfg(3, 2, 2));
    auto params = m.trainable();
    CHECK(std::find(params.begin(), params.end(), &m.embedding) == params.end());
    CHECK(params.size() + 1 == m.all_tensors().size());
}

TEST_CASE("evaluation forward is deterministic") {
    auto table = toy_table(6, 4, 8);
    auto m = irony::make_word_model<float>(table, small_cfg(4, 3, 2));
    std::vector<int> ids = {0, 3, 5, 1};
    auto p1 = irony::predict(m, ids);
    auto p2 = irony::predict(m, ids);
    CHECK(p1.probs == p2.probs);  // bitwise
    CHECK(p1.attn == p2.attn);
    CHECK(p1.label == p2.label);
}

TEST_CASE("training mode without regularizers equals evaluation mode") {
    auto table = toy_table(6, 4, 9);
    auto m = irony::make_word_model<double>(table, small_cfg(4, 3, 2));
    std::vector<int> ids = {2, 0, 4};
    Pcg32 rng(1);
    Tape<double> t1, t2;
    auto f_train = irony::model_forward(t1, m, ids, /*train=*/true, &rng);
    auto f_eval = irony::model_forward(t2, m, ids, /*train=*/false);
    CHECK(t1.value(f_train.probs) == t2.value(f_eval.probs));
}

TEST_CASE("training with regularizers but no rng is an error") {
    auto table = toy_table(4, 3, 10);
    auto cfg = small_cfg(3, 2, 2);
    cfg.noise_sigma = 0.05;
    auto m = irony::make_word_model<double>(table, cfg);
    Tape<double> tape;
    CHECK_THROWS_AS(irony::model_forward(tape, m, {0, 1}, true, nullptr),
                    std::invalid_argument);
}

TEST_CASE("an empty sequence is rejected") {
    auto table = toy_table(4, 3, 11);
    auto m = irony::make_word_model<double>(table, small_cfg(3, 2, 2));
    Tape<double> tape;
    CHECK_THROWS_AS(irony::model_forward(tape, m, {}), std::invalid_argument);
}

TEST_CASE("model probabilities live on the simplex") {
    auto table = toy_table(12, 5, 14);
    auto m = irony::make_word_model<float>(table, small_cfg(5, 4, 3));
    Pcg32 rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t len = 1 + rng.bounded(12);
        std::vector<int> ids(len);
        for (auto& id : ids) id = static_cast<int>(rng.bounded(13));  // 12 words + <unk>
        auto p = irony::predict(m, ids);
        double sum = 0;
        for (float v : p.probs) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
            sum += v;
        }
        CHECK(sum == Catch::Approx(1.0).margin(1e-6));
        double asum = 0;
        for (float v : p.attn) asum += v;
        CHECK(asum == Catch::Approx(1.0).margin(1e-6));
        CHECK(p.attn.size() == std::min<std::size_t>(len, m.cfg.max_len));
    }
}

TEST_CASE("mirrored parameters process the reversed sequence identically") {
    const std::size_t L = 3, D = 4;
    auto table = toy_table(8, D, 21);
    auto m = irony::make_word_model<double>(table, small_cfg(D, L, 2));
    // give the weights some signal so the check is not vacuous
    Pcg32 rng(77);
    for (auto* t : m.trainable()) t->fill_uniform(rng, -0.6, 0.6);

    ModelParams<double> mm = m;
    std::swap(mm.layer1.fwd, mm.layer1.bwd);
    // layer 2 consumes [h_fwd ; h_bwd]; the mirror consumes [h_bwd ; h_fwd],
    // so its cells come from the opposite direction with input halves swapped
    auto swap_input_halves = [&](const LstmCellParams<double>& src) {
        LstmCellParams<double> dst = src;
        for (std::size_t r = 0; r < 4 * L; ++r)
            for (std::size_t c = 0; c < L; ++c)
                std::swap(dst.W.data[r * (3 * L) + c], dst.W.data[r * (3 * L) + L + c]);
        return dst;
    };
    auto f2 = swap_input_halves(m.layer2.bwd);
    auto b2 = swap_input_halves(m.layer2.fwd);
    mm.layer2.fwd = f2;
    mm.layer2.bwd = b2;
    for (std::size_t c = 0; c < L; ++c) std::swap(mm.attn.W_h.data[c], mm.attn.W_h.data[L + c]);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < L; ++c)
            std::swap(mm.out.W.data[r * 2 * L + c], mm.out.W.data[r * 2 * L + L + c]);

    std::vector<int> ids = {1, 4, 0, 6, 3};
    std::vector<int> rev(ids.rbegin(), ids.rend());
    auto p = irony::predict(m, ids);
    auto q = irony::predict(mm, rev);
    REQUIRE(p.probs.size() == q.probs.size());
    for (std::size_t c = 0; c < p.probs.size(); ++c)
        CHECK(q.probs[c] == Catch::Approx(p.probs[c]).margin(1e-9));
    REQUIRE(p.attn.size() == q.attn.size());
    for (std::size_t t = 0; t < p.attn.size(); ++t)
        CHECK(q.attn[p.attn.size() - 1 - t] == Catch::Approx(p.attn[t]).margin(1e-9));
}

TEST_CASE("full model gradients pass finite differences in 64-bit") {
    const std::size_t L = 2, D = 3, C = 2;
    auto table = toy_table(6, D, 33);
    auto m = irony::make_word_model<double>(table, small_cfg(D, L, C));
    Pcg32 rng(55);
    for (auto* t : m.trainable()) t->fill_uniform(rng, -0.7, 0.7);

    std::vector<int> ids = {0, 4, 2, 5};
    const int target = 1;
    auto run = [&]() {
        for (auto* t : m.trainable()) t->zero_grad();
        Tape<double> tape;
        auto f = irony::model_forward(tape, m, ids, false);
        auto loss = tape.sum(tape.scale(tape.log_(tape.slice(f.probs, target, {1})), -1.0));
        double out = tape.value_scalar(loss);  // read before backward clears the tape
        tape.backward(loss);
        return out;
    };
    CHECK(irony::grad_check<double>(run, m.trainable(), 1e-5) < 1e-4);
}

TEST_CASE("checkpoints restore the exact model") {
    auto cfg = small_cfg(4, 3, 2);
    cfg.freeze_embedding = false;
    auto m = irony::make_char_model<float>({"a", "b", "c", " ", "\t", "\\"}, cfg);
    std::string path = "ckpt_roundtrip_test.txt";
    irony::save_checkpoint(m, path, "char");

    std::string level;
    auto back = irony::load_checkpoint<float>(path, &level);
    CHECK(level == "char");
    CHECK(back.vocab == m.vocab);
    CHECK(back.unk == m.unk);
    CHECK(back.cfg.emb_dim == m.cfg.emb_dim);
    CHECK(back.cfg.hidden == m.cfg.hidden);
    CHECK(back.cfg.freeze_embedding == m.cfg.freeze_embedding);

    auto orig = m.all_tensors();
    auto made = back.all_tensors();
    REQUIRE(orig.size() == made.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
        CHECK(orig[i]->shape == made[i]->shape);
        CHECK(orig[i]->data == made[i]->data);  // float-exact through the blob
    }

    std::vector<int> ids = m.encode({"a", "c", "q", "\\"});
    auto p1 = irony::predict(m, ids);
    auto p2 = irony::predict(back, ids);
    CHECK(p1.probs == p2.probs);

    std::remove(path.c_str());
    std::remove((path + ".bin").c_str());
}

TEST_CASE("a tampered vocabulary fails the checkpoint hash") {
    auto cfg = small_cfg(3, 2, 2);
    cfg.freeze_embedding = false;
    auto m = irony::make_char_model<float>({"x", "y"}, cfg);
    std::string path = "ckpt_tamper_test.txt";
    irony::save_checkpoint(m, path, "char");

    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    auto pos = text.rfind("\nx\n");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 3, "\nq\n");
    std::ofstream out(path);
    out << text;
    out.close();

    try {
        irony::load_checkpoint<float>(path);
        FAIL("expected a hash mismatch");
    } catch (const std::exception& e) {
        std::string msg = e.what();
        CAPTURE(msg);
        CHECK(msg.find("hash") != std::string::npos);
    }
    std::remove(path.c_str());
    std::remove((path + ".bin").c_str());
}

TEST_CASE("a truncated weight blob is rejected") {
    auto cfg = small_cfg(3, 2, 2);
    cfg.freeze_embedding = false;
    auto m = irony::make_char_model<float>({"x", "y"}, cfg);
    std::string path = "ckpt_trunc_test.txt";
    irony::save_checkpoint(m, path, "char");

    std::ifstream bin(path + ".bin", std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    bin.close();
    std::ofstream cut(path + ".bin", std::ios::binary);
    cut.write(blob.data(), static_cast<std::streamsize>(blob.size() - 8));
    cut.close();

    CHECK_THROWS_AS(irony::load_checkpoint<float>(path), std::runtime_error);
    std::remove(path.c_str());
    std::remove((path + ".bin").c_str());
}
