class Solution {
public:
    string longestCommonPrefix(vector<string>& strs) {
        throw runtime_error("not implemented");
    }
};
