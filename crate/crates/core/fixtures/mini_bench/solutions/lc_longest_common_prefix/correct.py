class Solution:
    def longestCommonPrefix(self, strs: List[str]) -> str:
        m = min(len(s) for s in strs)
        prefix = ''
        for i in range(m):
            c = strs[0][i]
            if any(s[i] != c for s in strs):
                break
            prefix += c
        return prefix
