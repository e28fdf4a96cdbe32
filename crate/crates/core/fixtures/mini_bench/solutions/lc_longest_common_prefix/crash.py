class Solution:
    def longestCommonPrefix(self, strs: List[str]) -> str:
        raise ValueError('not implemented')
