#include "mathsynth/bpe.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mathsynth {

namespace {

std::vector<std::string_view> chunk(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 1; i < text.size(); ++i) {
        if (text[i] == ' ' && text[i - 1] != ' ') {
            out.push_back(text.substr(start, i - start));
            start = i;
        }
    }
    if (start < text.size()) out.push_back(text.substr(start));
    return out;
}

std::set<unsigned char> alphabet(const std::vector<std::string>& corpus) {
    std::set<unsigned char> chars;
    for (int c = 32; c < 127; ++c) chars.insert(static_cast<unsigned char>(c));
    for (const auto& q : corpus)
        for (char c : q) chars.insert(static_cast<unsigned char>(c));
    return chars;
}

std::string escape(const std::string& tok) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (char ch : tok) {
        const auto c = static_cast<unsigned char>(ch);
        if (c == ' ')
            out += "\\s";
        else if (c == '\\')
            out += "\\\\";
        else if (c < 33 || c > 126) {
            out += "\\x";
            out += hex[c >> 4];
            out += hex[c & 15];
        } else
            out += ch;
    }
    return out;
}

std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\') {
            out += s[i];
            continue;
        }
        if (i + 1 >= s.size()) throw EncodingError("codec: dangling escape");
        const char k = s[++i];
        if (k == 's')
            out += ' ';
        else if (k == '\\')
            out += '\\';
        else if (k == 'x' && i + 2 < s.size()) {
            out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
            i += 2;
        } else
            throw EncodingError("codec: bad escape");
    }
    return out;
}

}  // namespace

std::size_t BpeCodec::base_size(const std::vector<std::string>& corpus) { return alphabet(corpus).size(); }

void BpeCodec::rebuild_index() {
    index_.clear();
    for (std::size_t i = 1; i < tokens_.size(); ++i) index_[tokens_[i]] = static_cast<int>(i);
    rank_.clear();
    for (std::size_t i = 0; i < merges_.size(); ++i) rank_[merges_[i]] = i;
}

BpeCodec BpeCodec::train(const std::vector<std::string>& corpus, std::size_t vocab_size, std::size_t max_len) {
    if (corpus.empty()) throw std::invalid_argument("bpe: empty corpus");
    if (max_len == 0) throw std::invalid_argument("bpe: max_len must be positive");
    const auto chars = alphabet(corpus);
    if (vocab_size <= chars.size())
        throw std::invalid_argument("bpe: vocab_size " + std::to_string(vocab_size) + " does not exceed base size " +
                                    std::to_string(chars.size()));
    BpeCodec codec;
    codec.max_len_ = max_len;
    codec.tokens_.push_back("");
    for (unsigned char c : chars) codec.tokens_.emplace_back(1, static_cast<char>(c));

    std::map<std::string, long> word_freq;
    for (const auto& q : corpus)
        for (auto w : chunk(q)) ++word_freq[std::string(w)];
    std::map<std::string, int> id_of;
    for (std::size_t i = 1; i < codec.tokens_.size(); ++i) id_of[codec.tokens_[i]] = static_cast<int>(i);
    std::vector<std::pair<std::vector<int>, long>> words;
    for (const auto& [w, f] : word_freq) {
        std::vector<int> symbols;
        for (char c : w) symbols.push_back(id_of.at(std::string(1, c)));
        words.emplace_back(std::move(symbols), f);
    }
    auto key = [](int a, int b) { return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b); };

    const std::size_t n_merges = vocab_size - chars.size();
    while (codec.merges_.size() < n_merges) {
        std::unordered_map<std::uint64_t, long> pairs;
        for (const auto& [symbols, f] : words)
            for (std::size_t i = 0; i + 1 < symbols.size(); ++i) pairs[key(symbols[i], symbols[i + 1])] += f;
        if (pairs.empty()) break;
        long top = 0;
        std::pair<std::string, std::string> best;
        for (const auto& [k, f] : pairs) {
            std::pair<std::string, std::string> p{codec.tokens_[k >> 32], codec.tokens_[k & 0xffffffffu]};
            if (f > top || (f == top && p < best)) {
                top = f;
                best = std::move(p);
            }
        }
        const int left = id_of.at(best.first), right = id_of.at(best.second);
        const std::string merged = best.first + best.second;
        codec.merges_.push_back(best);
        auto [it, fresh] = id_of.emplace(merged, static_cast<int>(codec.tokens_.size()));
        if (fresh) codec.tokens_.push_back(merged);
        const int merged_id = it->second;
        for (auto& [symbols, f] : words) {
            std::size_t out = 0;
            for (std::size_t i = 0; i < symbols.size(); ++i) {
                if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
                    symbols[out++] = merged_id;
                    ++i;
                } else {
                    symbols[out++] = symbols[i];
                }
            }
            symbols.resize(out);
        }
    }
    codec.rebuild_index();
    return codec;
}

std::vector<std::string> BpeCodec::apply_merges(std::string_view word) const {
    std::vector<std::string> symbols;
    for (char c : word) symbols.emplace_back(1, c);
    while (symbols.size() > 1) {
        std::size_t best_rank = rank_.size();
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            const auto it = rank_.find({symbols[i], symbols[i + 1]});
            if (it != rank_.end() && it->second < best_rank) best_rank = it->second;
        }
        if (best_rank == rank_.size()) break;
        const auto& [l, r] = merges_[best_rank];
        std::vector<std::string> next;
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            if (i + 1 < symbols.size() && symbols[i] == l && symbols[i + 1] == r) {
                next.push_back(l + r);
                ++i;
            } else {
                next.push_back(symbols[i]);
            }
        }
        symbols = std::move(next);
    }
    return symbols;
}

std::vector<int> BpeCodec::tokenize(std::string_view text) const {
    std::vector<int> ids;
    for (auto w : chunk(text)) {
        for (const auto& s : apply_merges(w)) {
            const auto it = index_.find(s);
            if (it == index_.end()) throw EncodingError("bpe: character outside the alphabet in \"" + std::string(w) + "\"");
            ids.push_back(it->second);
        }
    }
    return ids;
}

std::vector<int> BpeCodec::encode(std::string_view text) const {
    std::vector<int> ids = tokenize(text);
    if (ids.size() > max_len_)
        throw EncodingError("bpe: question needs " + std::to_string(ids.size()) + " tokens, limit is " +
                            std::to_string(max_len_));
    ids.resize(max_len_, pad_index());
    return ids;
}

std::string BpeCodec::decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
        if (id == pad_index()) continue;
        if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) throw EncodingError("bpe: token id out of range");
        out += tokens_[static_cast<std::size_t>(id)];
    }
    return out;
}

std::string BpeCodec::serialize() const {
    std::ostringstream out;
    out << "bpe 1\nmax_len " << max_len_ << "\nmerges " << merges_.size() << "\n";
    for (const auto& [l, r] : merges_) out << escape(l) << ' ' << escape(r) << '\n';
    out << "vocab " << tokens_.size() - 1 << "\n";
    for (std::size_t i = 1; i < tokens_.size(); ++i) out << i << ' ' << escape(tokens_[i]) << '\n';
    return out.str();
}

BpeCodec BpeCodec::deserialize(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string word;
    int version = 0;
    BpeCodec codec;
    std::size_t n = 0;
    if (!(in >> word >> version) || word != "bpe" || version != 1) throw EncodingError("codec: bad header");
    if (!(in >> word >> codec.max_len_) || word != "max_len") throw EncodingError("codec: missing max_len");
    if (!(in >> word >> n) || word != "merges") throw EncodingError("codec: missing merges");
    for (std::size_t i = 0; i < n; ++i) {
        std::string l, r;
        if (!(in >> l >> r)) throw EncodingError("codec: truncated merges");
        codec.merges_.emplace_back(unescape(l), unescape(r));
    }
    if (!(in >> word >> n) || word != "vocab") throw EncodingError("codec: missing vocab");
    codec.tokens_.assign(n + 1, "");
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t id = 0;
        std::string tok;
        if (!(in >> id >> tok) || id == 0 || id > n) throw EncodingError("codec: bad vocab entry");
        codec.tokens_[id] = unescape(tok);
    }
    codec.rebuild_index();
    return codec;
}

}  // namespace mathsynth
