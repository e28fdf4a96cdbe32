class Solution {
public:
    string longestCommonPrefix(vector<string>& strs) {
        size_t m = strs[0].size();
        for (auto& s : strs) m = min(m, s.size());
        string prefix;
        for (size_t i = 0; i < m; ++i) {
            char c = strs[0][i];
            for (auto& s : strs)
                if (s[i] != c) return prefix;
            prefix += c;
        }
        return prefix;
    }
};
