s = input().strip()
print(sum(1 for i in range(len(s) - 1) if s[i] in 'aeiou'))
