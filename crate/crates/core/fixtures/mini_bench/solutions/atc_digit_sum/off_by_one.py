s = input().strip()
print(sum(int(s[i]) for i in range(1, len(s))))
