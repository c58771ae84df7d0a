#include "lacuna/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lacuna/errors.hpp"
#include "lacuna/rng.hpp"

namespace lacuna {

namespace {

constexpr const char* kMagic = "LACUNA-NGRAM-1\n";

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

void put_str(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

class Reader {
public:
    Reader(const std::string& data, std::size_t offset) : data_(data), pos_(offset) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(byte()); }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
        return v;
    }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string str() {
        const std::uint32_t n = u32();
        if (pos_ + n > data_.size()) throw ConfigError("ngram model file truncated");
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t pos() const { return pos_; }

private:
    const std::string& data_;
    std::size_t pos_;

    unsigned char byte() {
        if (pos_ >= data_.size()) throw ConfigError("ngram model file truncated");
        return static_cast<unsigned char>(data_[pos_++]);
    }
};

}  // namespace

NgramModel::NgramModel(SubwordVocab vocab, std::uint32_t order, double kappa, double backoff)
    : vocab_(std::move(vocab)), order_(order), kappa_(kappa), backoff_(backoff) {
    if (order_ < 1) throw ConfigError("ngram order must be >= 1");
    if (!(kappa_ > 0.0)) throw ConfigError("ngram kappa must be > 0");
    if (!(backoff_ > 0.0 && backoff_ <= 1.0)) throw ConfigError("ngram backoff must lie in (0,1]");
    levels_.resize(order_);
}

std::string NgramModel::pack(std::span<const std::uint32_t> ids) {
    std::string key;
    key.reserve(ids.size() * 4);
    for (std::uint32_t id : ids) {
        for (int i = 0; i < 4; ++i) key.push_back(static_cast<char>((id >> (8 * i)) & 0xff));
    }
    return key;
}

void NgramModel::add_count(std::span<const std::uint32_t> context, std::uint32_t next,
                           std::uint64_t count) {
    if (context.size() >= order_) {
        throw ConfigError("add_count: context length must be below the model order");
    }
    auto& ctx = levels_[context.size()][pack(context)];
    ctx.next[next] += count;
    ctx.total += count;
}

std::uint64_t NgramModel::count(std::span<const std::uint32_t> context, std::uint32_t next) const {
    if (context.size() >= order_) return 0;
    const auto& table = levels_[context.size()];
    auto it = table.find(pack(context));
    if (it == table.end()) return 0;
    auto jt = it->second.next.find(next);
    return jt == it->second.next.end() ? 0 : jt->second;
}

std::uint64_t NgramModel::context_total(std::span<const std::uint32_t> context) const {
    if (context.size() >= order_) return 0;
    const auto& table = levels_[context.size()];
    auto it = table.find(pack(context));
    return it == table.end() ? 0 : it->second.total;
}

bool NgramModel::has_context(std::span<const std::uint32_t> context) const {
    return context_total(context) > 0;
}

void NgramModel::score_level(std::uint32_t m, std::span<const std::uint32_t> context,
                             std::vector<double>& out) const {
    const std::size_t v = vocab_.size();
    const auto ctx = context.subspan(context.size() - (m - 1));
    const auto& table = levels_[m - 1];
    auto it = table.find(pack(ctx));
    if (it == table.end() && m > 1) {
        score_level(m - 1, context, out);
        for (double& p : out) p *= backoff_;
        return;
    }
    const ContextCounts empty;
    const ContextCounts& counts = it == table.end() ? empty : it->second;
    const double denom = static_cast<double>(counts.total) + kappa_ * static_cast<double>(v);
    out.assign(v, kappa_ / denom);
    for (const auto& [id, c] : counts.next) {
        out[id] = (static_cast<double>(c) + kappa_) / denom;
    }
}

std::vector<double> NgramModel::next_distribution(std::span<const std::uint32_t> context) const {
    const std::uint32_t h =
        static_cast<std::uint32_t>(std::min<std::size_t>(order_, context.size() + 1));
    std::vector<double> out;
    score_level(h, context, out);
    double sum = 0.0;
    for (double p : out) sum += p;
    for (double& p : out) p /= sum;
    return out;
}

NgramModel NgramModel::train(const Corpus& corpus, const NgramConfig& cfg) {
    if (corpus.empty()) throw ConfigError("train_ngram: corpus is empty");

    SubwordVocab vocab(cfg.tokenizer);
    for (const auto& doc : corpus) {
        for (const auto& word : doc.words) {
            const auto chunks = chunk_word(word, cfg.tokenizer.chunk_len);
            for (std::size_t i = 0; i < chunks.size(); ++i) {
                vocab.get_or_add(chunks[i], i == 0);
            }
        }
    }

    NgramModel model(std::move(vocab), cfg.order, cfg.kappa, cfg.backoff);

    // One flat stream, end-of-text separating consecutive documents.
    std::vector<std::uint32_t> stream;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        if (d > 0) stream.push_back(model.vocab_.eot_id());
        for (const auto& word : corpus[d].words) {
            const auto ids = tokenize_word(model.vocab_, word);
            stream.insert(stream.end(), ids.begin(), ids.end());
        }
    }

    for (std::uint32_t m = 1; m <= cfg.order; ++m) {
        if (stream.size() < m) break;
        for (std::size_t start = 0; start + m <= stream.size(); ++start) {
            const std::span<const std::uint32_t> window(stream.data() + start, m);
            model.add_count(window.subspan(0, m - 1), window[m - 1]);
        }
    }
    return model;
}

std::string NgramModel::serialize() const {
    std::string payload;
    put_u32(payload, order_);
    put_f64(payload, kappa_);
    put_f64(payload, backoff_);

    const auto& tcfg = vocab_.config();
    put_str(payload, tcfg.mask_placeholder);
    put_str(payload, tcfg.unk_placeholder);
    put_str(payload, tcfg.end_of_text);
    put_u32(payload, static_cast<std::uint32_t>(tcfg.chunk_len));

    put_u32(payload, vocab_.size());
    for (std::uint32_t id = 0; id < vocab_.size(); ++id) {
        const auto& e = vocab_.entry(id);
        put_str(payload, e.text);
        put_u8(payload, e.begins_word ? 1 : 0);
    }

    for (std::uint32_t m = 1; m <= order_; ++m) {
        const auto& table = levels_[m - 1];
        std::vector<const std::string*> keys;
        keys.reserve(table.size());
        for (const auto& [k, _] : table) keys.push_back(&k);
        std::sort(keys.begin(), keys.end(),
                  [](const std::string* a, const std::string* b) { return *a < *b; });
        put_u64(payload, keys.size());
        for (const std::string* k : keys) {
            payload += *k;
            const auto& counts = table.at(*k);
            put_u32(payload, static_cast<std::uint32_t>(counts.next.size()));
            for (const auto& [id, c] : counts.next) {
                put_u32(payload, id);
                put_u64(payload, c);
            }
        }
    }

    std::string out = kMagic;
    out += payload;
    put_u64(out, fnv1a64(payload));
    return out;
}

void NgramModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open model file for writing: " + path);
    const std::string bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("failed writing model file: " + path);
}

NgramModel NgramModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();

    const std::size_t magic_len = std::strlen(kMagic);
    if (data.size() < magic_len + 8 || data.compare(0, magic_len, kMagic) != 0) {
        throw ConfigError("not an ngram model file (bad magic): " + path);
    }
    const std::string payload = data.substr(magic_len, data.size() - magic_len - 8);
    Reader tail(data, data.size() - 8);
    if (tail.u64() != fnv1a64(payload)) {
        throw ConfigError("ngram model file checksum mismatch: " + path);
    }

    Reader r(data, magic_len);
    const std::uint32_t order = r.u32();
    const double kappa = r.f64();
    const double backoff = r.f64();

    TokenizerConfig tcfg;
    tcfg.mask_placeholder = r.str();
    tcfg.unk_placeholder = r.str();
    tcfg.end_of_text = r.str();
    tcfg.chunk_len = r.u32();

    SubwordVocab vocab(tcfg);
    const std::uint32_t vocab_size = r.u32();
    for (std::uint32_t id = 0; id < vocab_size; ++id) {
        const std::string text = r.str();
        const bool begins = r.u8() != 0;
        if (id < vocab.size()) {
            if (vocab.entry(id).text != text || vocab.entry(id).begins_word != begins) {
                throw ConfigError("ngram model file has inconsistent reserved vocab entries");
            }
        } else {
            vocab.add(text, begins);
        }
    }

    NgramModel model(std::move(vocab), order, kappa, backoff);
    for (std::uint32_t m = 1; m <= order; ++m) {
        const std::uint64_t n_contexts = r.u64();
        for (std::uint64_t c = 0; c < n_contexts; ++c) {
            std::vector<std::uint32_t> ctx(m - 1);
            for (auto& id : ctx) id = r.u32();
            const std::uint32_t n_next = r.u32();
            for (std::uint32_t j = 0; j < n_next; ++j) {
                const std::uint32_t id = r.u32();
                const std::uint64_t cnt = r.u64();
                model.add_count(ctx, id, cnt);
            }
        }
    }
    return model;
}

std::uint32_t sample_from(const std::vector<double>& dist, double temperature,
                          std::mt19937_64& rng) {
    if (dist.empty()) throw DecodeError("sample_from: empty distribution");
    if (temperature <= 0.0) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < dist.size(); ++i) {
            if (dist[i] > dist[best]) best = i;
        }
        return static_cast<std::uint32_t>(best);
    }
    // Temperature-scaled weights in log space for stability.
    double max_log = -HUGE_VAL;
    std::vector<double> logs(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        logs[i] = std::log(dist[i]) / temperature;
        max_log = std::max(max_log, logs[i]);
    }
    double sum = 0.0;
    std::vector<double> weights(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        weights[i] = std::exp(logs[i] - max_log);
        sum += weights[i];
    }
    const double u = rand_unit(rng) * sum;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<std::uint32_t>(i);
    }
    return static_cast<std::uint32_t>(weights.size() - 1);
}

std::string NgramBackend::generate(const std::string& prompt, const SamplingParams& params) {
    if (prompt.empty()) throw ConfigError("generate: prompt is empty");
    std::vector<std::uint32_t> context = tokenize_text(model_.vocab(), prompt);
    std::mt19937_64 rng(params.seed);
    std::string out;
    for (std::size_t step = 0; step < params.max_new_tokens; ++step) {
        const auto dist = model_.next_distribution(context);
        const std::uint32_t id = sample_from(dist, params.temperature, rng);
        if (id == model_.vocab().eot_id()) break;
        context.push_back(id);
        const auto& entry = model_.vocab().entry(id);
        if (entry.begins_word && !out.empty()) out += ' ';
        out += entry.text;
        bool stopped = false;
        for (const auto& stop : params.stop_sequences) {
            if (stop.empty()) continue;
            const std::size_t pos = out.find(stop);
            if (pos != std::string::npos) {
                out.resize(pos);
                stopped = true;
                break;
            }
        }
        if (stopped) break;
    }
    return out;
}

}  // namespace lacuna
