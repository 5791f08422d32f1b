#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mathsynth {

struct EncodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Byte-pair codec over characters. Index 0 is padding; the base alphabet is
// printable ASCII plus any other byte seen in the training corpus. Words are
// chunked at spaces (a space starts a new chunk) and merges never cross chunks.
class BpeCodec {
public:
    BpeCodec() = default;

    // `vocab_size` counts base tokens and merges, not the pad token; training
    // stops early when no pair remains.
    static BpeCodec train(const std::vector<std::string>& corpus, std::size_t vocab_size, std::size_t max_len = 128);
    static std::size_t base_size(const std::vector<std::string>& corpus);

    // Padded to max_len; throws EncodingError when the text does not fit or
    // contains a byte outside the alphabet.
    std::vector<int> encode(std::string_view text) const;
    std::vector<int> tokenize(std::string_view text) const;
    std::string decode(const std::vector<int>& ids) const;

    int pad_index() const { return 0; }
    std::size_t max_len() const { return max_len_; }
    std::size_t vocab_size() const { return tokens_.size(); }  // including pad
    const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }

    // Line-oriented text: header, merge rules in order, then the vocabulary.
    std::string serialize() const;
    static BpeCodec deserialize(std::string_view text);

private:
    void rebuild_index();
    std::vector<std::string> apply_merges(std::string_view word) const;

    std::size_t max_len_ = 128;
    std::vector<std::string> tokens_;  // index -> token; tokens_[0] is the pad placeholder
    std::map<std::string, int> index_;
    std::vector<std::pair<std::string, std::string>> merges_;
    std::map<std::pair<std::string, std::string>, std::size_t> rank_;
};

}  // namespace mathsynth
